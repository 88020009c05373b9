#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "evmarker/raster.hpp"

namespace evm {

using MarkerCode = std::uint64_t;

/// Square binary grid, row-major. 0 = black, 1 = white.
struct BitGrid {
    int n = 0;
    std::vector<std::uint8_t> bits;

    BitGrid() = default;
    explicit BitGrid(int side, std::uint8_t fill = 0) : n(side), bits(static_cast<std::size_t>(side) * side, fill) {}

    std::uint8_t& operator()(int row, int col) { return bits[static_cast<std::size_t>(row) * n + col]; }
    std::uint8_t operator()(int row, int col) const { return bits[static_cast<std::size_t>(row) * n + col]; }

    friend bool operator==(const BitGrid&, const BitGrid&) = default;
};

/// Row-major concatenation, first row first, leftmost cell most significant.
MarkerCode bits_to_code(const BitGrid& grid);
BitGrid code_to_bits(MarkerCode code, int n);

/// 90 degrees clockwise.
BitGrid rotate_grid(const BitGrid& grid);

/// Minimum Hamming distance between `a` and the four rotations of `b`.
int orbit_distance(MarkerCode a, MarkerCode b, int n);
/// Minimum Hamming distance between `a` and its three non-trivial rotations.
int self_rotation_distance(MarkerCode a, int n);

class DictionaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LookupResult {
    int id = -1;
    int rotation_deg = 0;  // clockwise rotation of the observed grid relative to the entry

    friend bool operator==(const LookupResult&, const LookupResult&) = default;
};

class MarkerDictionary {
public:
    MarkerDictionary() = default;
    /// Throws DictionaryError if empty, n outside [1, 8], or two entries
    /// (or an entry and one of its own rotations) coincide.
    MarkerDictionary(std::string name, int n, std::vector<MarkerCode> codes);

    const std::string& name() const { return name_; }
    int code_size() const { return n_; }
    std::size_t size() const { return codes_.size(); }
    const std::vector<MarkerCode>& codes() const { return codes_; }
    MarkerCode code(int id) const;

    /// Tries the grid at 0, 90, 180 and 270 degrees.
    std::optional<LookupResult> lookup(const BitGrid& grid) const;

private:
    std::string name_;
    int n_ = 0;
    std::vector<MarkerCode> codes_;
    std::unordered_map<MarkerCode, int> index_;
};

/// Marker cells including the black border ring, (n + 2) x (n + 2).
BitGrid marker_cells(int id, const MarkerDictionary& dict);

/// Binary image of (n + 2) * cell_px pixels per side, 255 = white.
Raster<std::uint8_t> render_marker(int id, const MarkerDictionary& dict, int cell_px);

/// Rejection sampler: uniform random n x n codes, accepted when both the
/// self-rotation distance and the orbit distance to every accepted code are
/// >= min_distance. Deterministic for a given seed.
MarkerDictionary generate_dictionary(std::size_t count, int n, std::uint64_t seed, int min_distance = 10,
                                     std::size_t max_attempts = 10'000'000);

/// Text format: "N_m <n>" then one hex code per line.
MarkerDictionary read_dictionary(std::istream& in, std::string name = "custom");
MarkerDictionary load_dictionary(const std::string& path);
void write_dictionary(std::ostream& out, const MarkerDictionary& dict);

/// The bundled 16-entry 6x6 dictionary (data/dict_6x6_16.txt).
const MarkerDictionary& builtin_dictionary();
inline constexpr std::uint64_t kBuiltinDictionarySeed = 20211;

}  // namespace evm
