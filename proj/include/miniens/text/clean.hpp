#pragma once

#include <string>
#include <string_view>

namespace miniens::text {

// Tweet text after clean_text(). Guarantees: no URL remnants, no control or
// zero-width characters, no punctuation/symbol code points outside the kept
// set, single-space separated, no leading/trailing whitespace.
struct CleanText {
    std::string content;

    bool operator==(const CleanText&) const = default;
};

// Cleaning pipeline, applied in order:
//   1. URL removal: every maximal substring starting with "http://",
//      "https://" or "www." up to the next ASCII whitespace is deleted.
//   2. Invisible characters: C0/C1 controls (tab and newline become spaces,
//      the rest are deleted), zero-width space/joiner/non-joiner, BOM, and
//      directional marks are deleted. Malformed UTF-8 bytes are dropped here.
//   3. Symbols: code points in Unicode categories S* and P* are deleted,
//      except '@', '#', '_' and apostrophes (U+0027, U+2019); mention and
//      hashtag markers carry sentiment-bearing tokens, so they stay.
//   4. Whitespace: Z* separators become plain spaces, runs collapse to one
//      space, and the result is trimmed.
// Total over arbitrary byte strings; idempotent.
CleanText clean_text(std::string_view raw);

}  // namespace miniens::text
