#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strokegen/codec.hpp"

namespace strokegen {

enum class Split { train, validation, test };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

// 28x28 grayscale image, row 0 at the top, values in [0, 1].
struct Raster {
    static constexpr std::size_t kSide = 28;
    std::vector<double> pixels = std::vector<double>(kSide * kSide, 0.0);
};

struct LetterSample {
    std::string id;  // "<writer_id>:<letter>:<k>", stable across runs
    Trajectory trajectory;
    std::optional<Raster> raster;
    Split split_tag = Split::train;
};

// ---------------------------------------------------------------------------
// Ingestion: one JSON record per line,
//   {"writer_id": str, "letter": str, "points": [[x, y, t], ...]}
// ---------------------------------------------------------------------------

struct LoadReport {
    std::size_t parsed = 0;
    std::vector<std::pair<std::size_t, std::string>> errors;  // (line, reason)
};

std::vector<LetterSample> load_jsonl(const std::string& path,
                                     LoadReport* report = nullptr);
void save_jsonl(const std::vector<LetterSample>& samples, const std::string& path);

// ---------------------------------------------------------------------------
// Cleaning: drop tracings with more than max_steps displacements or longer
// than max_duration seconds. Idempotent.
// ---------------------------------------------------------------------------

struct CleanReport {
    std::size_t kept = 0;
    std::map<std::string, std::size_t> dropped;  // reason -> count
};

std::vector<LetterSample> clean(std::vector<LetterSample> samples,
                                std::size_t max_steps = kMaxSteps,
                                double max_duration = 1.0,
                                CleanReport* report = nullptr);

// ---------------------------------------------------------------------------
// Synthetic multi-writer corpus from built-in uppercase letter archetypes
// ---------------------------------------------------------------------------

struct LetterArchetype {
    char letter = '?';
    std::vector<std::vector<std::array<double, 2>>> strokes;  // y up, in [0,1]^2
};

const LetterArchetype& letter_archetype(char letter);

// Per-writer systematic variation; a deterministic function of
// (corpus seed, writer index).
struct SynthStyle {
    std::string writer_id;
    double slant_deg = 0.0;
    double scale = 1.0;
    double speed_gain = 1.0;
    std::array<bool, 26> stroke_order_flip{};
    double jitter_sigma = 0.0;
    int start_corner = 0;  // 0 NE, 1 NW, 2 SW, 3 SE; rotates closed loops
    double speed_warp = 0.0;
};

SynthStyle writer_style(std::uint64_t corpus_seed, int writer_index);

struct SynthConfig {
    std::string alphabet = "ABCDEFGHIJ";
    int n_writers = 20;
    int reps_per_writer = 5;
    std::uint64_t seed = 1;
};

// Every produced sample passes clean() by construction: sampled at 100 Hz,
// duration <= 0.9 s, at most 90 displacement steps.
std::vector<LetterSample> synth_corpus(const SynthConfig& config);

// ---------------------------------------------------------------------------
// Rasterization: anti-aliased polyline into the 28x28 box, 2 px margin
// ---------------------------------------------------------------------------

Raster rasterize(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Stratified split
// ---------------------------------------------------------------------------

enum class StratifyBy { letter, writer };

// Tags each sample in place. Every stratum appears in every split; strata
// with fewer than 3 samples are an error naming the stratum.
void split_samples(std::vector<LetterSample>& samples,
                   const std::array<double, 3>& fractions, std::uint64_t seed,
                   StratifyBy stratify = StratifyBy::letter);

}  // namespace strokegen
