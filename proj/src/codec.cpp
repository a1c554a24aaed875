#include "strokegen/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <fstream>
#include <istream>
#include <sstream>

#include "strokegen/error.hpp"

namespace strokegen {

namespace {

void validate_trajectory(const Trajectory& traj) {
    if (traj.points.size() < 2)
        fail("domain", "trajectory needs at least 2 points, got " +
                           std::to_string(traj.points.size()));
    for (std::size_t i = 1; i < traj.points.size(); ++i)
        if (traj.points[i].t <= traj.points[i - 1].t)
            fail("domain", "trajectory timestamps must be strictly increasing "
                           "(violated at point " + std::to_string(i) + ")");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<Displacement> displacements(const Trajectory& traj,
                                        std::size_t* merged_points) {
    validate_trajectory(traj);
    // merge exact duplicates: direction is undefined on a zero displacement
    std::vector<TimedPoint> pts;
    pts.reserve(traj.points.size());
    std::size_t merged = 0;
    for (const TimedPoint& p : traj.points) {
        if (!pts.empty() && p.x == pts.back().x && p.y == pts.back().y)
            ++merged;
        else
            pts.push_back(p);
    }
    if (merged_points) *merged_points = merged;
    if (pts.size() < 2)
        fail("domain", "trajectory collapses to a single point after merging "
                       "duplicates");

    std::vector<Displacement> out;
    out.reserve(pts.size() - 1);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double dx = pts[i].x - pts[i - 1].x;
        const double dy = pts[i].y - pts[i - 1].y;
        const double dt = pts[i].t - pts[i - 1].t;
        double angle = std::atan2(dy, dx) * (180.0 / std::numbers::pi);
        if (angle < 0.0) angle += 360.0;
        if (angle >= 360.0) angle = 0.0;
        out.push_back({angle, std::sqrt(dx * dx + dy * dy) / dt});
    }
    return out;
}

int freeman_encode(double angle_deg) {
    if (angle_deg < 0.0 || angle_deg >= 360.0)
        fail("domain", "freeman_encode expects angle in [0, 360), got " +
                           std::to_string(angle_deg));
    const double shifted = std::fmod(angle_deg + kSectorDeg / 2.0, 360.0);
    int code = static_cast<int>(shifted / kSectorDeg);
    return std::min(code, kDirectionLevels - 1);
}

int QuantizerSpec::speed_bin(double speed) const {
    auto it = std::upper_bound(speed_bin_edges.begin(), speed_bin_edges.end(), speed);
    return static_cast<int>(it - speed_bin_edges.begin());
}

void QuantizerSpec::validate() const {
    if (direction_levels != kDirectionLevels)
        fail("format", "quantizer: unsupported direction level count " +
                           std::to_string(direction_levels));
    if (speed_bin_edges.size() != kSpeedLevels - 1 ||
        speed_bin_centers.size() != kSpeedLevels)
        fail("format", "quantizer: expected 15 edges and 16 centers, got " +
                           std::to_string(speed_bin_edges.size()) + "/" +
                           std::to_string(speed_bin_centers.size()));
    for (std::size_t i = 1; i < speed_bin_edges.size(); ++i)
        if (speed_bin_edges[i] <= speed_bin_edges[i - 1])
            fail("format", "quantizer: edges not strictly ascending");
    for (std::size_t i = 0; i < speed_bin_centers.size(); ++i) {
        if (i > 0 && speed_bin_centers[i] < speed_bin_edges[i - 1])
            fail("format", "quantizer: center " + std::to_string(i) + " below its bin");
        if (i < speed_bin_edges.size() && speed_bin_centers[i] > speed_bin_edges[i])
            fail("format", "quantizer: center " + std::to_string(i) + " above its bin");
    }
}

QuantizerSpec fit_speed_quantizer(std::vector<double> speeds) {
    std::sort(speeds.begin(), speeds.end());
    const std::size_t n = speeds.size();
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (i == 0 || speeds[i] != speeds[i - 1]) ++distinct;
    if (distinct < kSpeedLevels)
        fail("domain", "fit_speed_quantizer needs at least 16 distinct speeds, got " +
                           std::to_string(distinct));

    QuantizerSpec spec;
    std::vector<std::size_t> splits(kSpeedLevels + 1, 0);
    splits[kSpeedLevels] = n;
    for (int k = 1; k < kSpeedLevels; ++k) {
        auto idx = static_cast<std::size_t>(
            std::lround(static_cast<double>(k) * static_cast<double>(n) / kSpeedLevels));
        idx = std::clamp<std::size_t>(idx, 1, n - 1);
        splits[k] = idx;
        spec.speed_bin_edges.push_back(0.5 * (speeds[idx - 1] + speeds[idx]));
    }
    for (std::size_t i = 1; i < spec.speed_bin_edges.size(); ++i)
        if (spec.speed_bin_edges[i] <= spec.speed_bin_edges[i - 1])
            fail("domain", "fit_speed_quantizer: too many tied speeds for 16 "
                           "equal-mass bins");

    for (int k = 0; k < kSpeedLevels; ++k) {
        const std::size_t lo = splits[k], hi = splits[k + 1];
        if (lo >= hi) fail("domain", "fit_speed_quantizer: empty bin " + std::to_string(k));
        const std::size_t m = hi - lo;
        const double median = (m % 2 == 1)
                                  ? speeds[lo + m / 2]
                                  : 0.5 * (speeds[lo + m / 2 - 1] + speeds[lo + m / 2]);
        spec.speed_bin_centers.push_back(median);
    }
    spec.validate();
    return spec;
}

std::string quantizer_to_text(const QuantizerSpec& spec) {
    std::ostringstream os;
    os << "strokegen-quantizer v1\n";
    os << "direction_levels " << spec.direction_levels << "\n";
    os << "edges";
    for (double e : spec.speed_bin_edges) os << " " << format_double(e);
    os << "\ncenters";
    for (double c : spec.speed_bin_centers) os << " " << format_double(c);
    os << "\n";
    return os.str();
}

QuantizerSpec quantizer_from_text(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "strokegen-quantizer" || version != "v1")
        fail("format", "not a strokegen-quantizer v1 record");
    std::string key;
    QuantizerSpec spec;
    in >> key >> spec.direction_levels;
    if (key != "direction_levels") fail("format", "quantizer record: expected direction_levels");
    in >> key;
    if (key != "edges") fail("format", "quantizer record: expected edges");
    spec.speed_bin_edges.resize(kSpeedLevels - 1);
    for (double& e : spec.speed_bin_edges) in >> e;
    in >> key;
    if (key != "centers") fail("format", "quantizer record: expected centers");
    spec.speed_bin_centers.resize(kSpeedLevels);
    for (double& c : spec.speed_bin_centers) in >> c;
    if (!in) fail("format", "quantizer record: truncated");
    spec.validate();
    return spec;
}

void save_quantizer(const QuantizerSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot write " + path);
    out << quantizer_to_text(spec);
}

QuantizerSpec load_quantizer(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot read " + path);
    return quantizer_from_text(in);
}

std::vector<double> EncodedTracing::frame_vector(std::size_t i) const {
    std::vector<double> v(kFrameDim, 0.0);
    v[frames[i].dir] = 1.0;
    v[kClassesPerBlock + frames[i].speed] = 1.0;
    return v;
}

void EncodedTracing::validate() const {
    if (frames.empty()) fail("format", "encoded tracing has no frames");
    if (frames.size() > kMaxSteps + 1)
        fail("format", "encoded tracing longer than 100 frames: " +
                           std::to_string(frames.size()));
    for (std::size_t i = 0; i + 1 < frames.size(); ++i)
        if (frames[i].dir >= kEosClass || frames[i].speed >= kEosClass)
            fail("format", "interior EOS or out-of-range code at frame " +
                               std::to_string(i));
    if (!frames.back().is_eos())
        fail("format", "final frame must be EOS in both blocks");
}

EncodedTracing EncodedTracing::from_codes(const std::vector<int>& dir_codes,
                                          const std::vector<int>& speed_codes) {
    if (dir_codes.size() != speed_codes.size())
        fail("format", "direction and speed code sequences differ in length");
    EncodedTracing enc;
    enc.frames.reserve(dir_codes.size() + 1);
    for (std::size_t i = 0; i < dir_codes.size(); ++i) {
        if (dir_codes[i] < 0 || dir_codes[i] >= kEosClass || speed_codes[i] < 0 ||
            speed_codes[i] >= kEosClass)
            fail("format", "content code out of range 0..15 at step " + std::to_string(i));
        enc.frames.push_back({static_cast<std::uint8_t>(dir_codes[i]),
                              static_cast<std::uint8_t>(speed_codes[i])});
    }
    enc.frames.push_back({kEosClass, kEosClass});
    enc.validate();
    return enc;
}

Frame EncodedTracing::frame_from_vector(const std::vector<double>& v) {
    if (v.size() != kFrameDim)
        fail("format", "frame vector must have 34 entries, got " +
                           std::to_string(v.size()));
    int dir = -1, speed = -1;
    for (int i = 0; i < kClassesPerBlock; ++i) {
        if (v[i] != 0.0) {
            if (dir >= 0 || v[i] != 1.0) fail("format", "frame direction block is not one-hot");
            dir = i;
        }
        if (v[kClassesPerBlock + i] != 0.0) {
            if (speed >= 0 || v[kClassesPerBlock + i] != 1.0)
                fail("format", "frame speed block is not one-hot");
            speed = i;
        }
    }
    if (dir < 0) fail("format", "frame direction block has no hot bit");
    if (speed < 0) fail("format", "frame speed block has no hot bit");
    return {static_cast<std::uint8_t>(dir), static_cast<std::uint8_t>(speed)};
}

EncodedTracing encode_tracing(const Trajectory& traj, const QuantizerSpec& spec) {
    spec.validate();
    const std::vector<Displacement> disps = displacements(traj);
    if (disps.size() > kMaxSteps)
        fail("domain", "tracing has " + std::to_string(disps.size()) +
                           " displacement steps, exceeding " + std::to_string(kMaxSteps));
    EncodedTracing enc;
    enc.frames.reserve(disps.size() + 1);
    for (const Displacement& d : disps)
        enc.frames.push_back({static_cast<std::uint8_t>(freeman_encode(d.angle_deg)),
                              static_cast<std::uint8_t>(spec.speed_bin(d.speed))});
    enc.frames.push_back({kEosClass, kEosClass});
    enc.validate();
    return enc;
}

Trajectory decode_tracing(const EncodedTracing& enc, const QuantizerSpec& spec,
                          TimedPoint start, double dt) {
    enc.validate();
    spec.validate();
    if (dt <= 0.0) fail("domain", "decode_tracing: dt must be positive");
    Trajectory traj;
    traj.points.push_back(start);
    double x = start.x, y = start.y, t = start.t;
    for (const Frame& f : enc.frames) {
        if (f.is_eos()) break;
        const double angle = f.dir * kSectorDeg * std::numbers::pi / 180.0;
        const double dist = spec.speed_bin_centers[f.speed] * dt;
        x += dist * std::cos(angle);
        y += dist * std::sin(angle);
        t += dt;
        traj.points.push_back({x, y, t});
    }
    return traj;
}

}  // namespace strokegen
