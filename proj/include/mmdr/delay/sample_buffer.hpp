#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace mmdr {

struct TimestampedSample {
    double time = 0.0;
    std::vector<double> value;
};

// Ring of timestamped vectors ordered oldest -> newest. Push enforces
// strictly increasing timestamps and a fixed value dimension; once `capacity`
// samples are held the oldest is evicted. Queries that fall outside the
// stored span clamp to the nearest end, which is exactly what a delayed
// reader should see right after reset.
class SampleBuffer {
public:
    explicit SampleBuffer(std::size_t capacity);

    void push(double time, std::vector<double> value);
    void clear();

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t capacity() const { return capacity_; }

    double newest_time() const;
    double oldest_time() const;

    // i = 0 is the newest sample, i = size()-1 the oldest.
    const TimestampedSample& from_newest(std::size_t i) const;

    // Piecewise-linear interpolation at time t, clamped to [oldest, newest].
    std::vector<double> query_interpolated(double t) const;

    // Latest sample with time <= t; clamps to the oldest sample when t
    // precedes everything stored.
    const TimestampedSample& nearest_older(double t) const;

private:
    std::size_t capacity_;
    std::size_t dim_ = 0;
    std::deque<TimestampedSample> samples_;
};

}  // namespace mmdr
