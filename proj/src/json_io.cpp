#include "floodsom/json_io.hpp"

#include <fstream>

#include "floodsom/errors.hpp"

namespace floodsom {

void to_json(json& j, const CellIndex& c) { j = json::array({c.row, c.col}); }

void from_json(const json& j, CellIndex& c) {
    if (!j.is_array() || j.size() != 2) throw ParseError("cell index must be [row, col]");
    c.row = j.at(0).get<std::size_t>();
    c.col = j.at(1).get<std::size_t>();
}

void to_json(json& j, const NormStats& s) {
    j = json{{"mean", s.mean}, {"std", s.std}, {"constant_mask", s.constant_mask}};
}

void from_json(const json& j, NormStats& s) {
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
    s.constant_mask = j.at("constant_mask").get<std::vector<bool>>();
    if (s.std.size() != s.mean.size() || s.constant_mask.size() != s.mean.size())
        throw ParseError("norm stats arrays differ in length");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("missing file: " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
}

}  // namespace floodsom
