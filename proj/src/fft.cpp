// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <stdexcept>
#include <utility>

namespace atomdiode {

namespace {

// The FFTW planner is not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

AlignedBuffer::AlignedBuffer(std::size_t size) : size_(size) {
    if (size == 0) return;
    data_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * size));
    if (!data_) throw std::bad_alloc();
    std::fill_n(data_, size, std::complex<double>{});
}

AlignedBuffer::AlignedBuffer(const AlignedBuffer& other) : AlignedBuffer(other.size_) {
    std::copy_n(other.data_, size_, data_);
}

AlignedBuffer::AlignedBuffer(AlignedBuffer&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}

AlignedBuffer& AlignedBuffer::operator=(const AlignedBuffer& other) {
    if (this == &other) return *this;
    if (size_ != other.size_) *this = AlignedBuffer(other.size_);
    std::copy_n(other.data_, size_, data_);
    return *this;
}

AlignedBuffer& AlignedBuffer::operator=(AlignedBuffer&& other) noexcept {
    if (this != &other) {
        if (data_) fftw_free(data_);
        data_ = std::exchange(other.data_, nullptr);
        size_ = std::exchange(other.size_, 0);
    }
    return *this;
}

AlignedBuffer::~AlignedBuffer() {
    if (data_) fftw_free(data_);
}

FftPlan FftPlan::batched_1d(std::size_t n, std::size_t batch) {
    FftPlan plan;
    plan.total_ = n * batch;
    AlignedBuffer scratch(plan.total_);
    const int len = static_cast<int>(n);
    std::lock_guard lock(planner_mutex());
    plan.forward_ = fftw_plan_many_dft(1, &len, static_cast<int>(batch), as_fftw(scratch.data()), nullptr, 1, len,
                                       as_fftw(scratch.data()), nullptr, 1, len, FFTW_FORWARD, FFTW_ESTIMATE);
    plan.backward_ = fftw_plan_many_dft(1, &len, static_cast<int>(batch), as_fftw(scratch.data()), nullptr, 1, len,
                                        as_fftw(scratch.data()), nullptr, 1, len, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan.forward_ || !plan.backward_) throw std::runtime_error("FFTW planning failed");
    return plan;
}

FftPlan FftPlan::square_2d(std::size_t n) {
    FftPlan plan;
    plan.total_ = n * n;
    AlignedBuffer scratch(plan.total_);
    const int len = static_cast<int>(n);
    std::lock_guard lock(planner_mutex());
    plan.forward_ = fftw_plan_dft_2d(len, len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                                     FFTW_ESTIMATE);
    plan.backward_ = fftw_plan_dft_2d(len, len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
    if (!plan.forward_ || !plan.backward_) throw std::runtime_error("FFTW planning failed");
    return plan;
}

FftPlan::FftPlan(FftPlan&& other) noexcept
    : forward_(std::exchange(other.forward_, nullptr)),
      backward_(std::exchange(other.backward_, nullptr)),
      total_(std::exchange(other.total_, 0)) {}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
    if (this != &other) {
        std::swap(forward_, other.forward_);
        std::swap(backward_, other.backward_);
        std::swap(total_, other.total_);
    }
    return *this;
}

FftPlan::~FftPlan() {
    std::lock_guard lock(planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
}

void FftPlan::forward(AlignedBuffer& data) const {
    if (data.size() != total_) throw std::invalid_argument("FFT buffer size mismatch");
    fftw_execute_dft(forward_, as_fftw(data.data()), as_fftw(data.data()));
}

void FftPlan::backward(AlignedBuffer& data) const {
    if (data.size() != total_) throw std::invalid_argument("FFT buffer size mismatch");
    fftw_execute_dft(backward_, as_fftw(data.data()), as_fftw(data.data()));
}

}  // namespace atomdiode
