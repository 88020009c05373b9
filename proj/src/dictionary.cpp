#include "evmarker/dictionary.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace evm {

MarkerCode bits_to_code(const BitGrid& grid) {
    MarkerCode code = 0;
    for (std::uint8_t b : grid.bits) code = (code << 1) | (b ? 1u : 0u);
    return code;
}

BitGrid code_to_bits(MarkerCode code, int n) {
    BitGrid grid(n);
    const std::size_t total = grid.bits.size();
    for (std::size_t i = 0; i < total; ++i) grid.bits[i] = static_cast<std::uint8_t>((code >> (total - 1 - i)) & 1u);
    return grid;
}

BitGrid rotate_grid(const BitGrid& grid) {
    BitGrid out(grid.n);
    for (int r = 0; r < grid.n; ++r)
        for (int c = 0; c < grid.n; ++c) out(r, c) = grid(grid.n - 1 - c, r);
    return out;
}

namespace {

MarkerCode rotate_code(MarkerCode code, int n) { return bits_to_code(rotate_grid(code_to_bits(code, n))); }

}  // namespace

int orbit_distance(MarkerCode a, MarkerCode b, int n) {
    int best = n * n;
    for (int k = 0; k < 4; ++k) {
        best = std::min(best, std::popcount(a ^ b));
        b = rotate_code(b, n);
    }
    return best;
}

int self_rotation_distance(MarkerCode a, int n) {
    int best = n * n;
    MarkerCode r = a;
    for (int k = 1; k < 4; ++k) {
        r = rotate_code(r, n);
        best = std::min(best, std::popcount(a ^ r));
    }
    return best;
}

MarkerDictionary::MarkerDictionary(std::string name, int n, std::vector<MarkerCode> codes)
    : name_(std::move(name)), n_(n), codes_(std::move(codes)) {
    if (n_ < 1 || n_ > 8) throw DictionaryError("code grid side must be in [1, 8]");
    if (codes_.empty()) throw DictionaryError("dictionary has no codes");
    const int bits = n_ * n_;
    const MarkerCode limit = bits == 64 ? ~MarkerCode{0} : (MarkerCode{1} << bits) - 1;
    std::unordered_map<MarkerCode, int> orbits;
    for (std::size_t id = 0; id < codes_.size(); ++id) {
        const MarkerCode c = codes_[id];
        if (c > limit) throw DictionaryError("code " + std::to_string(id) + " exceeds the grid size");
        MarkerCode r = c;
        for (int k = 0; k < 4; ++k) {
            if (k > 0 && r == c) throw DictionaryError("code " + std::to_string(id) + " is rotation symmetric");
            auto [it, inserted] = orbits.emplace(r, static_cast<int>(id));
            if (!inserted && it->second != static_cast<int>(id))
                throw DictionaryError("codes " + std::to_string(it->second) + " and " + std::to_string(id) +
                                      " are not distinct under rotation");
            r = rotate_code(r, n_);
        }
        index_.emplace(c, static_cast<int>(id));
    }
}

MarkerCode MarkerDictionary::code(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= codes_.size())
        throw DictionaryError("marker id " + std::to_string(id) + " is not in dictionary " + name_);
    return codes_[static_cast<std::size_t>(id)];
}

std::optional<LookupResult> MarkerDictionary::lookup(const BitGrid& grid) const {
    if (grid.n != n_) return std::nullopt;
    BitGrid g = grid;
    for (int k = 0; k < 4; ++k) {
        if (auto it = index_.find(bits_to_code(g)); it != index_.end()) {
            // g = rot^k(observed) equals the entry, so observed = rot^(4-k)(entry).
            return LookupResult{it->second, ((4 - k) % 4) * 90};
        }
        g = rotate_grid(g);
    }
    return std::nullopt;
}

BitGrid marker_cells(int id, const MarkerDictionary& dict) {
    const int n = dict.code_size();
    const BitGrid inner = code_to_bits(dict.code(id), n);
    BitGrid cells(n + 2, 0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) cells(r + 1, c + 1) = inner(r, c);
    return cells;
}

Raster<std::uint8_t> render_marker(int id, const MarkerDictionary& dict, int cell_px) {
    if (cell_px <= 0) throw DictionaryError("cell size must be positive");
    const BitGrid cells = marker_cells(id, dict);
    const int side = cells.n * cell_px;
    Raster<std::uint8_t> img(side, side, 0);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) img(x, y) = cells(y / cell_px, x / cell_px) ? 255 : 0;
    return img;
}

MarkerDictionary generate_dictionary(std::size_t count, int n, std::uint64_t seed, int min_distance,
                                     std::size_t max_attempts) {
    if (count == 0) throw DictionaryError("dictionary size must be positive");
    if (n < 1 || n > 8) throw DictionaryError("code grid side must be in [1, 8]");
    const int bits = n * n;
    const MarkerCode mask = bits == 64 ? ~MarkerCode{0} : (MarkerCode{1} << bits) - 1;

    std::mt19937_64 rng(seed);
    std::vector<MarkerCode> codes;
    for (std::size_t attempt = 0; attempt < max_attempts && codes.size() < count; ++attempt) {
        const MarkerCode c = rng() & mask;
        if (self_rotation_distance(c, n) < min_distance) continue;
        bool ok = true;
        for (MarkerCode other : codes)
            if (orbit_distance(c, other, n) < min_distance) {
                ok = false;
                break;
            }
        if (ok) codes.push_back(c);
    }
    if (codes.size() < count)
        throw DictionaryError("could not find " + std::to_string(count) + " codes with distance " +
                              std::to_string(min_distance));
    std::ostringstream name;
    name << "generated_" << n << "x" << n << "_" << count << "_seed" << seed;
    return MarkerDictionary(name.str(), n, std::move(codes));
}

MarkerDictionary read_dictionary(std::istream& in, std::string name) {
    std::string line;
    int lineno = 0;
    int n = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key >> n) || key != "N_m")
            throw DictionaryError("line " + std::to_string(lineno) + ": expected header \"N_m <n>\"");
        break;
    }
    if (n == 0) throw DictionaryError("missing dictionary header");

    std::vector<MarkerCode> codes;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::string token = line;
        if (token.starts_with("0x") || token.starts_with("0X")) token = token.substr(2);
        std::size_t used = 0;
        MarkerCode code = 0;
        try {
            code = std::stoull(token, &used, 16);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != token.size())
            throw DictionaryError("line " + std::to_string(lineno) + ": invalid hex code \"" + line + "\"");
        codes.push_back(code);
    }
    return MarkerDictionary(std::move(name), n, std::move(codes));
}

MarkerDictionary load_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DictionaryError("cannot open dictionary file " + path);
    return read_dictionary(in, path);
}

void write_dictionary(std::ostream& out, const MarkerDictionary& dict) {
    const int digits = (dict.code_size() * dict.code_size() + 3) / 4;
    out << "N_m " << dict.code_size() << '\n';
    for (MarkerCode c : dict.codes())
        out << std::hex << std::setw(digits) << std::setfill('0') << c << std::dec << '\n';
}

}  // namespace evm
