#include "miniens/tensor/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "miniens/error.hpp"

namespace miniens::tensor {

namespace {

void write_f64_le(std::ostream& os, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(buf, 8);
}

double read_f64_le(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::vector<NamedParam>& params, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot write checkpoint " + path.string());
    f << "miniens-ckpt 1\n";
    f << "params " << params.size() << '\n';
    for (const auto& p : params) {
        f << p.name;
        for (const int d : p.tensor.shape()) f << ' ' << d;
        f << '\n';
    }
    f << "data\n";
    for (const auto& p : params) {
        for (const double v : p.tensor.data()) write_f64_le(f, v);
    }
}

void load_checkpoint(std::vector<NamedParam>& params, const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot open checkpoint " + path.string());

    std::string line;
    if (!std::getline(f, line) || line != "miniens-ckpt 1") {
        throw CheckpointMismatch(path.string() + ": bad magic line");
    }
    if (!std::getline(f, line) || line.rfind("params ", 0) != 0) {
        throw CheckpointMismatch(path.string() + ": missing params count");
    }
    const std::size_t n = std::stoul(line.substr(7));
    if (n != params.size()) {
        throw CheckpointMismatch(path.string() + ": has " + std::to_string(n) +
                                 " params, model expects " + std::to_string(params.size()));
    }
    for (auto& p : params) {
        if (!std::getline(f, line)) throw CheckpointMismatch(path.string() + ": truncated header");
        std::istringstream row(line);
        std::string name;
        row >> name;
        Shape shape;
        int d = 0;
        while (row >> d) shape.push_back(d);
        if (name != p.name || shape != p.tensor.shape()) {
            throw CheckpointMismatch(path.string() + ": expected '" + p.name + " " +
                                     shape_str(p.tensor.shape()) + "', file has '" + name + " " +
                                     shape_str(shape) + "'");
        }
    }
    if (!std::getline(f, line) || line != "data") {
        throw CheckpointMismatch(path.string() + ": missing data marker");
    }
    for (auto& p : params) {
        for (auto& v : p.tensor.mutable_data()) {
            v = read_f64_le(f);
            if (!f) throw CheckpointMismatch(path.string() + ": truncated data section");
        }
    }
}

}  // namespace miniens::tensor
