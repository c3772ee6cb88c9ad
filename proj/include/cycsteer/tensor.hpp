#ifndef CYCSTEER_TENSOR_HPP
#define CYCSTEER_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cycsteer {

// Canonical image-batch shape (B, C, H, W). Fully-connected outputs use
// (B, units, 1, 1).
struct TensorShape {
    int batch = 0;
    int channels = 0;
    int height = 0;
    int width = 0;

    int64_t numel() const {
        return static_cast<int64_t>(batch) * channels * height * width;
    }
    int64_t per_sample() const { return static_cast<int64_t>(channels) * height * width; }
    bool operator==(const TensorShape&) const = default;
    std::string str() const {
        return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
               std::to_string(height) + "," + std::to_string(width) + ")";
    }
};

template <typename T>
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(TensorShape s) : shape_(s), data_(static_cast<size_t>(s.numel()), T(0)) {
        if (s.batch < 0 || s.channels < 0 || s.height < 0 || s.width < 0)
            throw std::invalid_argument("Tensor: negative dimension " + s.str());
    }
    Tensor(int b, int c, int h, int w) : Tensor(TensorShape{b, c, h, w}) {}

    const TensorShape& shape() const { return shape_; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& at(int b, int c, int h, int w) {
        return data_[((static_cast<int64_t>(b) * shape_.channels + c) * shape_.height + h) *
                         shape_.width + w];
    }
    T at(int b, int c, int h, int w) const {
        return data_[((static_cast<int64_t>(b) * shape_.channels + c) * shape_.height + h) *
                         shape_.width + w];
    }
    T& operator[](int64_t i) { return data_[i]; }
    T operator[](int64_t i) const { return data_[i]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        for (int64_t i = 0; i < numel(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    bool operator==(const Tensor&) const = default;

  private:
    TensorShape shape_{};
    std::vector<T> data_;
};

}  // namespace cycsteer

#endif
