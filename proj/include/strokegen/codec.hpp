#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace strokegen {

constexpr int kDirectionLevels = 16;
constexpr int kSpeedLevels = 16;
constexpr int kClassesPerBlock = 17;  // 16 levels + EOS
constexpr int kEosClass = 16;
constexpr int kFrameDim = 2 * kClassesPerBlock;  // 34
constexpr double kSectorDeg = 360.0 / kDirectionLevels;  // 22.5
constexpr std::size_t kMaxSteps = 99;
constexpr double kDefaultDt = 0.01;  // tablet sampled at 100 Hz

struct TimedPoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

// Raw pen path for one isolated letter: >= 2 points, t strictly increasing.
struct Trajectory {
    std::vector<TimedPoint> points;
    std::string writer_id;
    char letter = '?';
};

struct Displacement {
    double angle_deg = 0.0;  // in [0, 360)
    double speed = 0.0;      // pixels / second
};

// Per-segment direction and speed. Consecutive duplicate points are merged
// first (direction undefined on a zero displacement); the count of merged
// points is reported through `merged_points` when non-null.
std::vector<Displacement> displacements(const Trajectory& traj,
                                        std::size_t* merged_points = nullptr);

// Sector index for an angle in [0, 360): 16 equal sectors centered on
// multiples of 22.5 degrees.
int freeman_encode(double angle_deg);

struct QuantizerSpec {
    int direction_levels = kDirectionLevels;
    std::vector<double> speed_bin_edges;    // 15 ascending thresholds
    std::vector<double> speed_bin_centers;  // 16 bin medians

    int speed_bin(double speed) const;
    void validate() const;
};

// Equal-mass bins: edges at the k/16 quantiles, centers at bin medians.
// Requires at least 16 distinct speed values.
QuantizerSpec fit_speed_quantizer(std::vector<double> speeds);

// Human-readable text record (version, levels, edges, centers); values
// round-trip exactly.
std::string quantizer_to_text(const QuantizerSpec& spec);
QuantizerSpec quantizer_from_text(std::istream& in);
void save_quantizer(const QuantizerSpec& spec, const std::string& path);
QuantizerSpec load_quantizer(const std::string& path);

// One time step: a direction class and a speed class, each 0..16 with 16=EOS.
struct Frame {
    std::uint8_t dir = 0;
    std::uint8_t speed = 0;
    bool is_eos() const { return dir == kEosClass && speed == kEosClass; }
};

// Sequence of dual one-hot frames. Exactly the final frame is EOS in both
// blocks; total length <= 100 including it.
struct EncodedTracing {
    std::vector<Frame> frames;

    std::size_t length() const { return frames.size(); }
    std::size_t content_steps() const { return frames.empty() ? 0 : frames.size() - 1; }

    // Dense 34-dim one-hot pair for frame i.
    std::vector<double> frame_vector(std::size_t i) const;

    // Throws a "format" error if the dual one-hot/EOS invariants are violated.
    void validate() const;

    static EncodedTracing from_codes(const std::vector<int>& dir_codes,
                                     const std::vector<int>& speed_codes);
    // Frame from a dense 34-dim vector; throws "format" unless each block has
    // exactly one hot bit.
    static Frame frame_from_vector(const std::vector<double>& v);
};

// One frame per displacement plus a terminal EOS frame. Tracings longer than
// kMaxSteps displacements are rejected.
EncodedTracing encode_tracing(const Trajectory& traj, const QuantizerSpec& spec);

// Inverse map: each frame advances by speed_bin_centers[speed] * dt along the
// sector-center direction. Stops at EOS.
Trajectory decode_tracing(const EncodedTracing& enc, const QuantizerSpec& spec,
                          TimedPoint start = {}, double dt = kDefaultDt);

}  // namespace strokegen
