#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smw/error.hpp"

namespace smw {

/// Row-major n-dimensional array.
template <class T>
class DenseTensor {
public:
    using value_type = T;

    DenseTensor() = default;

    explicit DenseTensor(std::vector<std::size_t> shape, T fill = T{})
        : shape_(std::move(shape)), values_(product(shape_), fill) {}

    DenseTensor(std::vector<std::size_t> shape, std::vector<T> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (values_.size() != product(shape_))
            throw Error(ErrorCode::ShapeMismatch, "value count " + std::to_string(values_.size()) +
                                                      " does not match shape product " +
                                                      std::to_string(product(shape_)));
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

    std::span<const T> values() const noexcept { return values_; }
    std::span<T> values() noexcept { return values_; }

    const T& operator[](std::size_t flat) const { return values_[flat]; }
    T& operator[](std::size_t flat) { return values_[flat]; }

    /// Shape without the leading (channel) axis.
    std::vector<std::size_t> trailing_shape() const {
        return shape_.empty() ? std::vector<std::size_t>{} : std::vector<std::size_t>(shape_.begin() + 1, shape_.end());
    }

    /// Contiguous slice along the leading axis.
    std::span<const T> channel(std::size_t c) const {
        const std::size_t stride = shape_.empty() ? 0 : values_.size() / shape_[0];
        return std::span<const T>(values_).subspan(c * stride, stride);
    }

    static std::size_t product(const std::vector<std::size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    }

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<T> values_;
};

template <class T>
constexpr std::string_view dtype_name();
template <>
constexpr std::string_view dtype_name<float>() { return "f32"; }
template <>
constexpr std::string_view dtype_name<std::int32_t>() { return "i32"; }

namespace detail {

inline std::string tensor_stem(std::string path) {
    for (std::string_view ext : {".json", ".bin"}) {
        if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
            path.resize(path.size() - ext.size());
            break;
        }
    }
    return path;
}

template <class T>
T byteswap_value(T v) {
    static_assert(sizeof(T) == 4);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    bits = ((bits & 0xff) << 24) | ((bits & 0xff00) << 8) | ((bits >> 8) & 0xff00) | (bits >> 24);
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace detail

/// Writes `<stem>.json` (dtype, shape, order "C", endian "LE") and `<stem>.bin`
/// (raw little-endian payload). A trailing .json/.bin on `path` is ignored.
template <class T>
void write_tensor(const std::string& path, const DenseTensor<T>& t) {
    const std::string stem = detail::tensor_stem(path);
    nlohmann::ordered_json header;
    header["dtype"] = dtype_name<T>();
    header["shape"] = t.shape();
    header["order"] = "C";
    header["endian"] = "LE";
    std::ofstream hj(stem + ".json");
    if (!hj) throw Error(ErrorCode::IoError, "cannot write " + stem + ".json");
    hj << header.dump(2) << '\n';

    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw Error(ErrorCode::IoError, "cannot write " + stem + ".bin");
    if constexpr (std::endian::native == std::endian::little) {
        bin.write(reinterpret_cast<const char*>(t.values().data()),
                  static_cast<std::streamsize>(t.size() * sizeof(T)));
    } else {
        for (T v : t.values()) {
            const T le = detail::byteswap_value(v);
            bin.write(reinterpret_cast<const char*>(&le), sizeof(T));
        }
    }
    if (!bin) throw Error(ErrorCode::IoError, "short write to " + stem + ".bin");
}

template <class T>
DenseTensor<T> read_tensor(const std::string& path) {
    const std::string stem = detail::tensor_stem(path);
    std::ifstream hj(stem + ".json");
    if (!hj) throw Error(ErrorCode::IoError, "cannot open " + stem + ".json");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hj);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, stem + ".json: " + e.what());
    }
    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!header.contains(key)) throw ParseError(0, stem + ".json: missing \"" + key + "\"");
        return header[key];
    };
    try {
        if (require("dtype").template get<std::string>() != dtype_name<T>())
            throw Error(ErrorCode::ShapeMismatch, stem + ": expected dtype " + std::string(dtype_name<T>()) +
                                                      ", found " + header["dtype"].get<std::string>());
        if (header.contains("order") && header["order"].get<std::string>() != "C")
            throw ParseError(0, stem + ".json: only order \"C\" is supported");
        if (header.contains("endian") && header["endian"].get<std::string>() != "LE")
            throw ParseError(0, stem + ".json: only endian \"LE\" is supported");
        auto shape = require("shape").template get<std::vector<std::size_t>>();

        std::ifstream bin(stem + ".bin", std::ios::binary | std::ios::ate);
        if (!bin) throw Error(ErrorCode::IoError, "cannot open " + stem + ".bin");
        const auto bytes = static_cast<std::size_t>(bin.tellg());
        const std::size_t count = DenseTensor<T>::product(shape);
        if (bytes != count * sizeof(T))
            throw Error(ErrorCode::ShapeMismatch, stem + ".bin holds " + std::to_string(bytes) + " bytes, shape needs " +
                                                      std::to_string(count * sizeof(T)));
        std::vector<T> values(count);
        bin.seekg(0);
        bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
        if constexpr (std::endian::native != std::endian::little)
            for (T& v : values) v = detail::byteswap_value(v);
        return DenseTensor<T>(std::move(shape), std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, stem + ".json: " + e.what());
    }
}

} // namespace smw
