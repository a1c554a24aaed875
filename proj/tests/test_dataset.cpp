#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "strokegen/dataset.hpp"
#include "strokegen/error.hpp"

using namespace strokegen;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/strokegen_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
    void write(const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
};

}  // namespace

TEST_CASE("load_jsonl: empty file gives empty list and zero errors") {
    TempFile f("empty.jsonl");
    f.write("");
    LoadReport report;
    auto samples = load_jsonl(f.path, &report);
    CHECK(samples.empty());
    CHECK(report.parsed == 0);
    CHECK(report.errors.empty());
}

TEST_CASE("load_jsonl: minimal two-point record is valid") {
    TempFile f("ok.jsonl");
    f.write(R"({"writer_id": "w1", "letter": "A", "points": [[0,0,0],[1,2,0.01]]})"
            "\n");
    LoadReport report;
    auto samples = load_jsonl(f.path, &report);
    REQUIRE(samples.size() == 1);
    CHECK(report.errors.empty());
    CHECK(samples[0].trajectory.letter == 'A');
    CHECK(samples[0].trajectory.writer_id == "w1");
    CHECK(samples[0].id == "w1:A:0");
    CHECK(samples[0].trajectory.points.size() == 2);
}

TEST_CASE("load_jsonl: decreasing timestamps are rejected with the line number") {
    TempFile f("bad_t.jsonl");
    f.write(R"({"writer_id": "w1", "letter": "A", "points": [[0,0,0],[1,2,0.01]]})"
            "\n"
            R"({"writer_id": "w1", "letter": "B", "points": [[0,0,0.5],[1,2,0.1]]})"
            "\n");
    LoadReport report;
    auto samples = load_jsonl(f.path, &report);
    CHECK(samples.size() == 1);
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].first == 2);
    CHECK(report.errors[0].second.find("non-monotonic timestamp") != std::string::npos);
}

TEST_CASE("load_jsonl: missing fields and invalid JSON are reported per record") {
    TempFile f("bad.jsonl");
    f.write(R"({"letter": "A", "points": [[0,0,0],[1,2,0.01]]})"
            "\n"
            "this is not json\n");
    LoadReport report;
    auto samples = load_jsonl(f.path, &report);
    CHECK(samples.empty());
    CHECK(report.errors.size() == 2);
    CHECK(report.errors[0].second.find("writer_id") != std::string::npos);
}

TEST_CASE("save_jsonl round-trips through load_jsonl") {
    SynthConfig cfg;
    cfg.alphabet = "AB";
    cfg.n_writers = 2;
    cfg.reps_per_writer = 1;
    cfg.seed = 5;
    auto samples = synth_corpus(cfg);
    TempFile f("roundtrip.jsonl");
    save_jsonl(samples, f.path);
    LoadReport report;
    auto back = load_jsonl(f.path, &report);
    REQUIRE(back.size() == samples.size());
    CHECK(report.errors.empty());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].trajectory.letter == samples[i].trajectory.letter);
        CHECK(back[i].trajectory.points.size() == samples[i].trajectory.points.size());
        for (std::size_t k = 0; k < back[i].trajectory.points.size(); ++k) {
            CHECK(back[i].trajectory.points[k].x == samples[i].trajectory.points[k].x);
            CHECK(back[i].trajectory.points[k].t == samples[i].trajectory.points[k].t);
        }
    }
}

namespace {

LetterSample line_sample(int n_points, double dt, char letter = 'A') {
    LetterSample s;
    s.trajectory.letter = letter;
    s.trajectory.writer_id = "w0";
    for (int i = 0; i < n_points; ++i)
        s.trajectory.points.push_back({static_cast<double>(i), 0.5 * i, i * dt});
    return s;
}

}  // namespace

TEST_CASE("clean keeps the 99-step, 0.99 s boundary case") {
    CleanReport report;
    auto kept = clean({line_sample(100, 0.01)}, 99, 1.0, &report);
    CHECK(kept.size() == 1);
    CHECK(report.kept == 1);
}

TEST_CASE("clean drops tracings with 100 displacements") {
    CleanReport report;
    auto kept = clean({line_sample(101, 0.0099)}, 99, 1.0, &report);
    CHECK(kept.empty());
    CHECK(report.dropped.at("too_many_steps") == 1);
}

TEST_CASE("clean drops tracings longer than one second") {
    CleanReport report;
    auto kept = clean({line_sample(61, 0.02)}, 99, 1.0, &report);
    CHECK(kept.empty());
    CHECK(report.dropped.at("too_long_duration") == 1);
}

TEST_CASE("clean is idempotent") {
    std::vector<LetterSample> mixed = {line_sample(100, 0.01), line_sample(101, 0.0099),
                                       line_sample(40, 0.01)};
    auto once = clean(mixed);
    auto twice = clean(once);
    CHECK(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(once[i].trajectory.points.size() == twice[i].trajectory.points.size());
}

TEST_CASE("synth_corpus: same seed gives bit-identical corpora") {
    SynthConfig cfg;
    cfg.alphabet = "AXO";
    cfg.n_writers = 3;
    cfg.reps_per_writer = 2;
    cfg.seed = 42;
    auto a = synth_corpus(cfg);
    auto b = synth_corpus(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        REQUIRE(a[i].trajectory.points.size() == b[i].trajectory.points.size());
        for (std::size_t k = 0; k < a[i].trajectory.points.size(); ++k) {
            CHECK(a[i].trajectory.points[k].x == b[i].trajectory.points[k].x);
            CHECK(a[i].trajectory.points[k].y == b[i].trajectory.points[k].y);
            CHECK(a[i].trajectory.points[k].t == b[i].trajectory.points[k].t);
        }
    }
}

TEST_CASE("synth_corpus: counting 10 letters x 20 writers x 1 rep gives 200 samples") {
    SynthConfig cfg;
    cfg.alphabet = "ABCDEFGHIJ";
    cfg.n_writers = 20;
    cfg.reps_per_writer = 1;
    cfg.seed = 3;
    CHECK(synth_corpus(cfg).size() == 200);
}

TEST_CASE("synth_corpus rejects unknown letters") {
    SynthConfig cfg;
    cfg.alphabet = "A?";
    CHECK_THROWS_AS(synth_corpus(cfg), Error);
}

TEST_CASE("stroke-order flip starts X tracings at different corners") {
    // find two writers whose X flip bits differ
    const std::uint64_t seed = 11;
    int flipped = -1, unflipped = -1;
    for (int w = 0; w < 16 && (flipped < 0 || unflipped < 0); ++w) {
        if (writer_style(seed, w).stroke_order_flip['X' - 'A'])
            flipped = flipped < 0 ? w : flipped;
        else
            unflipped = unflipped < 0 ? w : unflipped;
    }
    REQUIRE(flipped >= 0);
    REQUIRE(unflipped >= 0);

    SynthConfig cfg;
    cfg.alphabet = "X";
    cfg.n_writers = 16;
    cfg.reps_per_writer = 1;
    cfg.seed = seed;
    auto samples = synth_corpus(cfg);
    const auto& a = samples[flipped].trajectory;    // X starts bottom-right
    const auto& b = samples[unflipped].trajectory;  // X starts top-left
    const double ay = a.points.front().y, by = b.points.front().y;
    // unflipped X starts at its top-left corner (high y), flipped at the end
    // of the second stroke (low y)
    CHECK(by > ay);
}

TEST_CASE("synthetic samples all pass clean() by construction") {
    SynthConfig cfg;
    cfg.alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    cfg.n_writers = 4;
    cfg.reps_per_writer = 1;
    cfg.seed = 17;
    auto samples = synth_corpus(cfg);
    CleanReport report;
    auto kept = clean(samples, kMaxSteps, 1.0, &report);
    CHECK(kept.size() == samples.size());
    for (const auto& s : kept) {
        const double duration =
            s.trajectory.points.back().t - s.trajectory.points.front().t;
        CHECK(duration <= 1.0);
        CHECK(displacements(s.trajectory).size() <= kMaxSteps);
    }
}

TEST_CASE("rasterize: horizontal segment marks only middle rows") {
    Trajectory traj;
    traj.points = {{0, 0, 0}, {10, 0, 0.1}};
    Raster img = rasterize(traj);
    for (std::size_t row = 0; row < Raster::kSide; ++row) {
        double row_sum = 0;
        for (std::size_t col = 0; col < Raster::kSide; ++col)
            row_sum += img.pixels[row * Raster::kSide + col];
        if (row < 11 || row > 16) CHECK(row_sum == 0.0);
    }
    double total = 0;
    for (double v : img.pixels) total += v;
    CHECK(total > 0.0);
}

TEST_CASE("rasterize output stays in [0,1] over a whole corpus") {
    SynthConfig cfg;
    cfg.alphabet = "AKQSW";
    cfg.n_writers = 3;
    cfg.reps_per_writer = 2;
    cfg.seed = 23;
    for (const auto& s : synth_corpus(cfg)) {
        Raster img = rasterize(s.trajectory);
        double mn = 1e300, mx = -1e300;
        for (double v : img.pixels) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        CHECK(mn >= 0.0);
        CHECK(mx <= 1.0);
        CHECK(mx > 0.0);
    }
}

TEST_CASE("rasterize is deterministic") {
    SynthConfig cfg;
    cfg.alphabet = "G";
    cfg.n_writers = 1;
    cfg.reps_per_writer = 1;
    cfg.seed = 31;
    auto samples = synth_corpus(cfg);
    Raster a = rasterize(samples[0].trajectory);
    Raster b = rasterize(samples[0].trajectory);
    CHECK(a.pixels == b.pixels);
}

TEST_CASE("rasterize degenerate single-point trajectory gives a centered dot") {
    Trajectory traj;
    traj.points = {{5, 5, 0}, {5, 5, 0.01}};
    Raster img = rasterize(traj);
    double total = 0;
    for (double v : img.pixels) total += v;
    CHECK(total > 0.0);
    // mass concentrated near the center
    double center_mass = 0;
    for (std::size_t row = 12; row <= 15; ++row)
        for (std::size_t col = 12; col <= 15; ++col)
            center_mass += img.pixels[row * Raster::kSide + col];
    CHECK(center_mass == doctest::Approx(total));
}

TEST_CASE("split_samples: fractions, stratification, determinism") {
    SynthConfig cfg;
    cfg.alphabet = "ABCDEFGHIJ";
    cfg.n_writers = 4;
    cfg.reps_per_writer = 5;
    cfg.seed = 7;
    auto samples = synth_corpus(cfg);
    REQUIRE(samples.size() == 200);
    split_samples(samples, {0.8, 0.1, 0.1}, 99, StratifyBy::letter);

    std::map<Split, int> counts;
    std::map<char, std::set<Split>> per_letter;
    for (const auto& s : samples) {
        ++counts[s.split_tag];
        per_letter[s.trajectory.letter].insert(s.split_tag);
    }
    CHECK(counts[Split::train] == 160);
    CHECK(counts[Split::validation] == 20);
    CHECK(counts[Split::test] == 20);
    for (const auto& [letter, splits] : per_letter) CHECK(splits.size() == 3);

    auto again = synth_corpus(cfg);
    split_samples(again, {0.8, 0.1, 0.1}, 99, StratifyBy::letter);
    for (std::size_t i = 0; i < samples.size(); ++i)
        CHECK(samples[i].split_tag == again[i].split_tag);
}

TEST_CASE("split_samples names a letter with too few samples") {
    SynthConfig cfg;
    cfg.alphabet = "AB";
    cfg.n_writers = 1;
    cfg.reps_per_writer = 2;
    cfg.seed = 7;
    auto samples = synth_corpus(cfg);
    try {
        split_samples(samples, {0.8, 0.1, 0.1}, 1, StratifyBy::letter);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("'A'") != std::string::npos);
    }
}

TEST_CASE("split_samples validates fractions") {
    SynthConfig cfg;
    cfg.alphabet = "A";
    cfg.n_writers = 3;
    cfg.reps_per_writer = 2;
    auto samples = synth_corpus(cfg);
    std::array<double, 3> bad = {0.5, 0.2, 0.2};
    CHECK_THROWS_AS(split_samples(samples, bad, 1), Error);
}
