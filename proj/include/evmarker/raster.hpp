#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace evm {

/// Row-major W x H image.
template <typename T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Raster() = default;
    Raster(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    bool empty() const { return data.empty(); }
    std::size_t size() const { return data.size(); }

    T& operator()(int x, int y) {
        assert(contains(x, y));
        return data[static_cast<std::size_t>(y) * width + x];
    }
    const T& operator()(int x, int y) const {
        assert(contains(x, y));
        return data[static_cast<std::size_t>(y) * width + x];
    }

    friend bool operator==(const Raster&, const Raster&) = default;
};

using Mask = Raster<std::uint8_t>;

}  // namespace evm
