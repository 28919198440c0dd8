#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "divlab/errors.hpp"

namespace divlab {

struct TrajectorySample {
    std::uint64_t t;
    std::uint64_t diversity;
};

struct WindowSummary {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    double mean = 0;
    double variance = 0;
};

struct HittingTimes {
    std::optional<std::uint64_t> down;  ///< first t with S <= (1+eps) S0
    std::optional<std::uint64_t> up;    ///< first t with S >= (1-eps) S0
    std::optional<std::uint64_t> eps;   ///< first t with S inside the band
    bool capped = false;                ///< run hit its step cap before crossing
};

/// Recorded (t, S) samples of one run plus the metadata needed to reproduce
/// it. Samples are strictly increasing in t and bounded by mu^2 n / 2.
struct TrajectoryRecord {
    std::string fingerprint;
    std::vector<std::string> config_lines;
    std::vector<TrajectorySample> samples;
    std::optional<WindowSummary> summary;
    std::optional<HittingTimes> hitting;

    void append(std::uint64_t t, std::uint64_t diversity, std::uint64_t max_diversity) {
        if (!samples.empty() && samples.back().t >= t) {
            throw UsageError("trajectory samples must be strictly increasing in t");
        }
        if (diversity > max_diversity) {
            throw UsageError("diversity sample exceeds the attainable maximum");
        }
        samples.push_back({t, diversity});
    }

    /// CSV with a comment preamble carrying the full configuration.
    void write_csv(std::ostream& os) const {
        os << "# fingerprint=" << fingerprint << '\n';
        for (const auto& line : config_lines) os << "# " << line << '\n';
        os << "t,S\n";
        for (const auto& s : samples) os << s.t << ',' << s.diversity << '\n';
    }
};

/// Fills record.summary with mean/variance of S over sampled steps
/// t in [from, to].
inline void attach_window_summary(TrajectoryRecord& record, std::uint64_t from,
                                  std::uint64_t to) {
    if (from > to) throw UsageError("summary window is empty");
    WindowSummary summary{from, to, 0, 0};
    std::uint64_t count = 0;
    double mean = 0, m2 = 0;
    for (const auto& s : record.samples) {
        if (s.t < from || s.t > to) continue;
        ++count;
        const double x = static_cast<double>(s.diversity);
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    if (count == 0) throw UsageError("no samples inside the summary window");
    summary.mean = mean;
    summary.variance = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    record.summary = summary;
}

/// Fills record.hitting with the first sampled crossings of the thresholds
/// (1+eps)*s0 downwards, (1-eps)*s0 upwards, and the band between them.
/// Samples taken with a stride above 1 can miss a crossing; this annotates
/// what the record actually shows.
inline void annotate_hitting_times(TrajectoryRecord& record, double s0, double eps) {
    HittingTimes times;
    const double down = (1.0 + eps) * s0;
    const double up = (1.0 - eps) * s0;
    for (const auto& s : record.samples) {
        const double x = static_cast<double>(s.diversity);
        if (!times.down && x <= down) times.down = s.t;
        if (!times.up && x >= up) times.up = s.t;
        if (!times.eps && x >= up && x <= down) times.eps = s.t;
    }
    times.capped = !times.down || !times.up;
    record.hitting = times;
}

} // namespace divlab
