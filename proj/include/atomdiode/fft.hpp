// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>

typedef struct fftw_plan_s* fftw_plan;

namespace atomdiode {

/// Owning complex buffer allocated with fftw_malloc so that every buffer has
/// the same SIMD alignment; plans created on one buffer can then execute on
/// any other of the same shape with identical floating-point results.
class AlignedBuffer {
public:
    AlignedBuffer() = default;
    explicit AlignedBuffer(std::size_t size);
    AlignedBuffer(const AlignedBuffer& other);
    AlignedBuffer(AlignedBuffer&& other) noexcept;
    AlignedBuffer& operator=(const AlignedBuffer& other);
    AlignedBuffer& operator=(AlignedBuffer&& other) noexcept;
    ~AlignedBuffer();

    std::complex<double>* data() noexcept { return data_; }
    const std::complex<double>* data() const noexcept { return data_; }
    std::size_t size() const noexcept { return size_; }
    std::complex<double>& operator[](std::size_t i) noexcept { return data_[i]; }
    const std::complex<double>& operator[](std::size_t i) const noexcept { return data_[i]; }
    std::span<std::complex<double>> span() noexcept { return {data_, size_}; }
    std::span<const std::complex<double>> span() const noexcept { return {data_, size_}; }

private:
    std::complex<double>* data_ = nullptr;
    std::size_t size_ = 0;
};

/// In-place unnormalized DFTs on `batch` contiguous transforms of length `n`
/// (1D), or on one n x n array (2D). Planned with FFTW_ESTIMATE so the
/// algorithm is identical for every instance of the same shape.
class FftPlan {
public:
    static FftPlan batched_1d(std::size_t n, std::size_t batch);
    static FftPlan square_2d(std::size_t n);

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&& other) noexcept;
    FftPlan& operator=(FftPlan&& other) noexcept;
    ~FftPlan();

    std::size_t size() const noexcept { return total_; }
    void forward(AlignedBuffer& data) const;   ///< sum_x f(x) e^{-ikx}
    void backward(AlignedBuffer& data) const;  ///< sum_k f(k) e^{+ikx}, no 1/n

private:
    FftPlan() = default;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
    std::size_t total_ = 0;
};

}  // namespace atomdiode
