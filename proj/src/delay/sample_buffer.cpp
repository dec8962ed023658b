#include "mmdr/delay/sample_buffer.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mmdr {

SampleBuffer::SampleBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
        throw std::invalid_argument("SampleBuffer capacity must be positive");
    }
}

void SampleBuffer::push(double time, std::vector<double> value) {
    if (!samples_.empty()) {
        if (time <= samples_.back().time) {
            throw std::invalid_argument(
                "SampleBuffer::push: time " + std::to_string(time) +
                " not after newest " + std::to_string(samples_.back().time));
        }
        if (value.size() != dim_) {
            throw std::invalid_argument(
                "SampleBuffer::push: value dimension " +
                std::to_string(value.size()) + " != " + std::to_string(dim_));
        }
    } else {
        if (value.empty()) {
            throw std::invalid_argument("SampleBuffer::push: empty value");
        }
        dim_ = value.size();
    }
    if (samples_.size() == capacity_) samples_.pop_front();
    samples_.push_back(TimestampedSample{time, std::move(value)});
}

void SampleBuffer::clear() {
    samples_.clear();
    dim_ = 0;
}

double SampleBuffer::newest_time() const {
    if (samples_.empty()) throw std::out_of_range("SampleBuffer: empty");
    return samples_.back().time;
}

double SampleBuffer::oldest_time() const {
    if (samples_.empty()) throw std::out_of_range("SampleBuffer: empty");
    return samples_.front().time;
}

const TimestampedSample& SampleBuffer::from_newest(std::size_t i) const {
    if (i >= samples_.size()) {
        throw std::out_of_range("SampleBuffer::from_newest: index " +
                                std::to_string(i) + " >= size " +
                                std::to_string(samples_.size()));
    }
    return samples_[samples_.size() - 1 - i];
}

std::vector<double> SampleBuffer::query_interpolated(double t) const {
    if (samples_.empty()) {
        throw std::out_of_range("SampleBuffer::query_interpolated: empty");
    }
    if (t >= samples_.back().time) return samples_.back().value;
    if (t <= samples_.front().time) return samples_.front().value;

    // First sample with time >= t; the bracket is [it-1, it].
    auto it = std::lower_bound(
        samples_.begin(), samples_.end(), t,
        [](const TimestampedSample& s, double q) { return s.time < q; });
    const TimestampedSample& hi = *it;
    const TimestampedSample& lo = *(it - 1);
    const double w = (t - lo.time) / (hi.time - lo.time);

    std::vector<double> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = lo.value[i] + w * (hi.value[i] - lo.value[i]);
    }
    return out;
}

const TimestampedSample& SampleBuffer::nearest_older(double t) const {
    if (samples_.empty()) {
        throw std::out_of_range("SampleBuffer::nearest_older: empty");
    }
    if (t < samples_.front().time) return samples_.front();
    // Last sample with time <= t.
    auto it = std::upper_bound(
        samples_.begin(), samples_.end(), t,
        [](double q, const TimestampedSample& s) { return q < s.time; });
    return *(it - 1);
}

}  // namespace mmdr
