#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "strokegen/codec.hpp"
#include "strokegen/error.hpp"
#include "strokegen/rng.hpp"

using namespace strokegen;

namespace {

Trajectory make_traj(std::vector<TimedPoint> pts) {
    Trajectory t;
    t.points = std::move(pts);
    t.writer_id = "w0";
    t.letter = 'A';
    return t;
}

QuantizerSpec uniform_quantizer(double lo, double hi) {
    // fit on a fine uniform lattice so bins are equal width and medians are
    // (numerically) midpoints
    std::vector<double> speeds;
    const int n = 16 * 101;
    speeds.reserve(n);
    for (int i = 0; i < n; ++i)
        speeds.push_back(lo + (hi - lo) * (i + 0.5) / static_cast<double>(n));
    return fit_speed_quantizer(speeds);
}

}  // namespace

TEST_CASE("displacements: unit step right in 10 ms is 0 degrees at 100 px/s") {
    auto d = displacements(make_traj({{0, 0, 0}, {1, 0, 0.01}}));
    REQUIRE(d.size() == 1);
    CHECK(d[0].angle_deg == doctest::Approx(0.0));
    CHECK(d[0].speed == doctest::Approx(100.0));
}

TEST_CASE("displacements: unit step up is 90 degrees") {
    auto d = displacements(make_traj({{0, 0, 0}, {0, 1, 0.01}}));
    REQUIRE(d.size() == 1);
    CHECK(d[0].angle_deg == doctest::Approx(90.0));
}

TEST_CASE("displacements match per-segment recomputation on random polylines") {
    SeededRng rng(71);
    for (int trial = 0; trial < 50; ++trial) {
        Trajectory traj;
        traj.letter = 'R';
        double t = 0.0;
        const int n = 2 + static_cast<int>(rng.uniform_int(30));
        for (int i = 0; i < n; ++i) {
            t += 0.01;
            traj.points.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), t});
        }
        auto d = displacements(traj);
        REQUIRE(d.size() == traj.points.size() - 1);
        for (std::size_t i = 1; i < traj.points.size(); ++i) {
            const double dx = traj.points[i].x - traj.points[i - 1].x;
            const double dy = traj.points[i].y - traj.points[i - 1].y;
            double ang = std::atan2(dy, dx) * (180.0 / std::numbers::pi);
            if (ang < 0) ang += 360.0;
            CHECK(d[i - 1].angle_deg == doctest::Approx(ang));
            CHECK(d[i - 1].speed ==
                  doctest::Approx(std::sqrt(dx * dx + dy * dy) / 0.01));
        }
    }
}

TEST_CASE("displacements merge duplicate consecutive points") {
    std::size_t merged = 0;
    auto d = displacements(
        make_traj({{0, 0, 0}, {0, 0, 0.01}, {2, 0, 0.02}}), &merged);
    CHECK(merged == 1);
    REQUIRE(d.size() == 1);
    // geometry preserved: 2 px over the merged 0.02 s
    CHECK(d[0].speed == doctest::Approx(100.0));
}

TEST_CASE("displacements reject degenerate trajectories") {
    CHECK_THROWS_AS(displacements(make_traj({{1, 1, 0}})), Error);
    CHECK_THROWS_AS(displacements(make_traj({{1, 1, 0}, {1, 1, 0.01}})), Error);
    CHECK_THROWS_AS(displacements(make_traj({{0, 0, 0.02}, {1, 0, 0.01}})), Error);
}

TEST_CASE("freeman_encode sector centers and boundaries") {
    CHECK(freeman_encode(0.0) == 0);
    CHECK(freeman_encode(90.0) == 4);
    CHECK(freeman_encode(11.24) == 0);
    CHECK(freeman_encode(11.26) == 1);
    CHECK(freeman_encode(359.9) == 0);  // wraps into sector 0
    CHECK(freeman_encode(348.7) == 15);
    CHECK_THROWS_AS(freeman_encode(360.0), Error);
    CHECK_THROWS_AS(freeman_encode(-0.1), Error);
}

TEST_CASE("freeman_encode is rotation-consistent") {
    SeededRng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        // keep away from sector boundaries
        const int sector = static_cast<int>(rng.uniform_int(16));
        const double a =
            std::fmod(sector * 22.5 + rng.uniform(-11.0, 11.0) + 360.0, 360.0);
        const int base = freeman_encode(a);
        for (int k = 1; k < 16; ++k) {
            const double rotated = std::fmod(a + 22.5 * k, 360.0);
            CHECK(freeman_encode(rotated) == (base + k) % 16);
        }
    }
}

TEST_CASE("fit_speed_quantizer: uniform 1..160 gives ten samples per bin") {
    std::vector<double> speeds;
    for (int i = 1; i <= 160; ++i) speeds.push_back(i);
    QuantizerSpec spec = fit_speed_quantizer(speeds);
    REQUIRE(spec.speed_bin_edges.size() == 15);
    REQUIRE(spec.speed_bin_centers.size() == 16);
    for (int k = 1; k <= 15; ++k)
        CHECK(spec.speed_bin_edges[k - 1] == doctest::Approx(10.0 * k + 0.5));
    // sort-and-split oracle: each bin holds exactly 10 of the training values
    std::vector<int> counts(16, 0);
    for (double s : speeds) ++counts[spec.speed_bin(s)];
    for (int c : counts) CHECK(c == 10);
}

TEST_CASE("fit_speed_quantizer rejects all-equal speeds") {
    std::vector<double> speeds(100, 3.0);
    CHECK_THROWS_AS(fit_speed_quantizer(speeds), Error);
}

TEST_CASE("fit_speed_quantizer: log-normal sample balances bins within one") {
    SeededRng rng(123);
    std::vector<double> speeds;
    const int n = 800;
    for (int i = 0; i < n; ++i) speeds.push_back(std::exp(rng.normal() * 0.8 + 4.0));
    QuantizerSpec spec = fit_speed_quantizer(speeds);
    std::vector<int> counts(16, 0);
    for (double s : speeds) ++counts[spec.speed_bin(s)];
    for (int c : counts) {
        CHECK(c >= n / 16 - 1);
        CHECK(c <= n / 16 + 1);
    }
}

TEST_CASE("fit_speed_quantizer is permutation-invariant") {
    SeededRng rng(9);
    std::vector<double> speeds;
    for (int i = 0; i < 500; ++i) speeds.push_back(rng.uniform(1.0, 900.0));
    QuantizerSpec a = fit_speed_quantizer(speeds);
    rng.shuffle(speeds);
    QuantizerSpec b = fit_speed_quantizer(speeds);
    CHECK(a.speed_bin_edges == b.speed_bin_edges);
    CHECK(a.speed_bin_centers == b.speed_bin_centers);
}

TEST_CASE("encode_tracing: two points give one content frame plus EOS") {
    QuantizerSpec spec = uniform_quantizer(10.0, 500.0);
    EncodedTracing enc = encode_tracing(make_traj({{0, 0, 0}, {1, 0, 0.01}}), spec);
    CHECK(enc.length() == 2);
    CHECK(enc.content_steps() == 1);
    CHECK(enc.frames[0].dir == 0);
    CHECK(enc.frames[1].is_eos());
    enc.validate();
}

TEST_CASE("encode_tracing rejects tracings with 100 displacements") {
    QuantizerSpec spec = uniform_quantizer(10.0, 500.0);
    Trajectory traj;
    for (int i = 0; i <= 100; ++i)
        traj.points.push_back({static_cast<double>(i), 0.0, i * 0.01});
    CHECK(traj.points.size() == 101);
    CHECK_THROWS_AS(encode_tracing(traj, spec), Error);
    // 99 displacements is the boundary: accepted
    traj.points.resize(100);
    EncodedTracing enc = encode_tracing(traj, spec);
    CHECK(enc.content_steps() == 99);
}

TEST_CASE("encoded frames are valid dual one-hots") {
    QuantizerSpec spec = uniform_quantizer(10.0, 500.0);
    SeededRng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Trajectory traj;
        double t = 0, x = 0, y = 0;
        const int n = 1 + static_cast<int>(rng.uniform_int(40));
        traj.points.push_back({x, y, t});
        for (int i = 0; i < n; ++i) {
            x += rng.uniform(-3, 3);
            y += rng.uniform(-3, 3);
            t += 0.01;
            traj.points.push_back({x, y, t});
        }
        EncodedTracing enc;
        try {
            enc = encode_tracing(traj, spec);
        } catch (const Error&) {
            continue;  // duplicate-merged degenerate case
        }
        for (std::size_t i = 0; i < enc.length(); ++i) {
            const auto v = enc.frame_vector(i);
            int hot_dir = 0, hot_speed = 0;
            for (int k = 0; k < kClassesPerBlock; ++k) {
                if (v[k] == 1.0) ++hot_dir;
                if (v[kClassesPerBlock + k] == 1.0) ++hot_speed;
            }
            CHECK(hot_dir == 1);
            CHECK(hot_speed == 1);
            Frame f = EncodedTracing::frame_from_vector(v);
            CHECK(f.dir == enc.frames[i].dir);
            CHECK(f.speed == enc.frames[i].speed);
        }
    }
}

TEST_CASE("frame_from_vector rejects malformed frames") {
    std::vector<double> none(kFrameDim, 0.0);
    CHECK_THROWS_AS(EncodedTracing::frame_from_vector(none), Error);
    std::vector<double> twice(kFrameDim, 0.0);
    twice[0] = twice[1] = 1.0;
    twice[20] = 1.0;
    CHECK_THROWS_AS(EncodedTracing::frame_from_vector(twice), Error);
}

TEST_CASE("decode_tracing: single frame from origin moves along sector 0") {
    QuantizerSpec spec = uniform_quantizer(10.0, 500.0);
    EncodedTracing enc = EncodedTracing::from_codes({0}, {7});
    Trajectory traj = decode_tracing(enc, spec, {0, 0, 0}, 0.01);
    REQUIRE(traj.points.size() == 2);
    CHECK(traj.points[1].x ==
          doctest::Approx(spec.speed_bin_centers[7] * 0.01).epsilon(1e-12));
    CHECK(traj.points[1].y == doctest::Approx(0.0));
}

TEST_CASE("encode-decode reproduces sector-center, bin-center tracings to 1e-9") {
    QuantizerSpec spec = uniform_quantizer(10.0, 500.0);
    SeededRng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        // build a trajectory whose segments sit exactly on sector centers and
        // bin centers
        std::vector<int> dirs, speeds;
        const int n = 1 + static_cast<int>(rng.uniform_int(30));
        for (int i = 0; i < n; ++i) {
            dirs.push_back(static_cast<int>(rng.uniform_int(16)));
            speeds.push_back(static_cast<int>(rng.uniform_int(16)));
        }
        Trajectory traj;
        double x = 5, y = -3, t = 0;
        traj.points.push_back({x, y, t});
        for (int i = 0; i < n; ++i) {
            const double ang = dirs[i] * 22.5 * std::numbers::pi / 180.0;
            const double dist = spec.speed_bin_centers[speeds[i]] * 0.01;
            x += dist * std::cos(ang);
            y += dist * std::sin(ang);
            t += 0.01;
            traj.points.push_back({x, y, t});
        }
        EncodedTracing enc = encode_tracing(traj, spec);
        Trajectory back = decode_tracing(enc, spec, traj.points[0], 0.01);
        REQUIRE(back.points.size() == traj.points.size());
        for (std::size_t i = 1; i < traj.points.size(); ++i) {
            const double ddx = (back.points[i].x - back.points[i - 1].x) -
                               (traj.points[i].x - traj.points[i - 1].x);
            const double ddy = (back.points[i].y - back.points[i - 1].y) -
                               (traj.points[i].y - traj.points[i - 1].y);
            CHECK(std::fabs(ddx) < 1e-9);
            CHECK(std::fabs(ddy) < 1e-9);
        }
    }
}

TEST_CASE("encode-decode bounds: angle within 11.25 deg, speed within half bin") {
    QuantizerSpec spec = uniform_quantizer(10.0, 500.0);
    // effective bin boundaries for the uniform fit, for width bookkeeping
    std::vector<double> bounds;
    bounds.push_back(10.0);
    for (double e : spec.speed_bin_edges) bounds.push_back(e);
    bounds.push_back(500.0);

    SeededRng rng(41);
    std::size_t steps_checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Trajectory traj;
        double x = 0, y = 0, t = 0;
        traj.points.push_back({x, y, t});
        const int n = 1 + static_cast<int>(rng.uniform_int(60));
        for (int i = 0; i < n; ++i) {
            const double ang = rng.uniform(0.0, 360.0) * std::numbers::pi / 180.0;
            const double speed = rng.uniform(10.0 + 1e-9, 500.0 - 1e-9);
            x += speed * 0.01 * std::cos(ang);
            y += speed * 0.01 * std::sin(ang);
            t += 0.01;
            traj.points.push_back({x, y, t});
        }
        auto orig = displacements(traj);
        EncodedTracing enc = encode_tracing(traj, spec);
        Trajectory back = decode_tracing(enc, spec, traj.points[0], 0.01);
        auto rec = displacements(back);
        REQUIRE(rec.size() == orig.size());
        for (std::size_t i = 0; i < rec.size(); ++i) {
            double dang = std::fabs(rec[i].angle_deg - orig[i].angle_deg);
            dang = std::min(dang, 360.0 - dang);
            CHECK(dang <= 11.25 + 1e-9);
            const int bin = spec.speed_bin(orig[i].speed);
            const double half_width = 0.5 * (bounds[bin + 1] - bounds[bin]);
            CHECK(std::fabs(rec[i].speed - orig[i].speed) <= half_width + 1e-6);
            ++steps_checked;
        }
    }
    CHECK(steps_checked > 10000);
}

TEST_CASE("quantizer text record round-trips exactly") {
    SeededRng rng(55);
    std::vector<double> speeds;
    for (int i = 0; i < 400; ++i) speeds.push_back(rng.uniform(3.0, 700.0));
    QuantizerSpec spec = fit_speed_quantizer(speeds);
    const std::string text = quantizer_to_text(spec);
    std::istringstream in(text);
    QuantizerSpec back = quantizer_from_text(in);
    CHECK(back.direction_levels == spec.direction_levels);
    CHECK(back.speed_bin_edges == spec.speed_bin_edges);
    CHECK(back.speed_bin_centers == spec.speed_bin_centers);
    CHECK(quantizer_to_text(back) == text);
}

TEST_CASE("quantizer text parser rejects junk") {
    std::istringstream in("not-a-quantizer v9");
    CHECK_THROWS_AS(quantizer_from_text(in), Error);
}
