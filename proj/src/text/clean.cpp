#include "miniens/text/clean.hpp"

#include <array>
#include <cctype>

#include "miniens/text/unicode_categories.hpp"
#include "miniens/text/utf8.hpp"

namespace miniens::text {

namespace {

bool is_ascii_space(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return u < 0x80 && std::isspace(u) != 0;
}

bool starts_url(std::string_view s, std::size_t i) {
    static constexpr std::array<std::string_view, 3> kPrefixes{"http://", "https://", "www."};
    for (const auto p : kPrefixes) {
        if (s.compare(i, p.size(), p) == 0) return true;
    }
    return false;
}

std::string strip_urls(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        if (starts_url(raw, i)) {
            while (i < raw.size() && !is_ascii_space(raw[i])) ++i;
            continue;
        }
        out.push_back(raw[i]);
        ++i;
    }
    return out;
}

bool is_invisible(char32_t cp) {
    if (cp == U'\t' || cp == U'\n') return false;       // handled as whitespace
    if (cp <= 0x1F || (cp >= 0x7F && cp <= 0x9F)) return true;  // C0, DEL, C1
    switch (cp) {
        case 0x200B:  // zero-width space
        case 0x200C:  // zero-width non-joiner
        case 0x200D:  // zero-width joiner
        case 0xFEFF:  // BOM / zero-width no-break space
        case 0x200E:  // left-to-right mark
        case 0x200F:  // right-to-left mark
        case 0x061C:  // Arabic letter mark
            return true;
        default:
            break;
    }
    if (cp >= 0x202A && cp <= 0x202E) return true;  // directional embedding/override
    if (cp >= 0x2066 && cp <= 0x2069) return true;  // directional isolates
    return false;
}

bool is_kept_mark(char32_t cp) {
    return cp == U'@' || cp == U'#' || cp == U'_' || cp == 0x0027 || cp == 0x2019;
}

}  // namespace

CleanText clean_text(std::string_view raw) {
    const std::string no_urls = strip_urls(raw);
    const std::vector<char32_t> cps = decode_utf8_lossy(no_urls);

    std::string out;
    out.reserve(no_urls.size());
    bool pending_space = false;
    for (const char32_t cp : cps) {
        if (is_invisible(cp)) continue;
        if (!is_kept_mark(cp) && (is_punctuation(cp) || is_symbol(cp))) continue;
        if (cp == U'\t' || cp == U'\n' || cp == U' ' || is_separator(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        append_utf8(out, cp);
    }
    return CleanText{std::move(out)};
}

}  // namespace miniens::text
