#include "strokegen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "json.hpp"
#include "strokegen/error.hpp"
#include "strokegen/rng.hpp"

namespace strokegen {

using nlohmann::json;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "validation") return Split::validation;
    if (name == "test") return Split::test;
    fail("format", "unknown split tag '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSONL ingestion
// ---------------------------------------------------------------------------

namespace {

LetterSample parse_record(const json& rec) {
    if (!rec.is_object()) fail("format", "record is not an object");
    if (!rec.contains("writer_id") || !rec["writer_id"].is_string())
        fail("format", "missing field writer_id");
    if (!rec.contains("letter") || !rec["letter"].is_string())
        fail("format", "missing field letter");
    if (!rec.contains("points") || !rec["points"].is_array())
        fail("format", "missing field points");
    const std::string letter = rec["letter"].get<std::string>();
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z')
        fail("format", "letter must be a single uppercase character, got '" + letter + "'");

    LetterSample sample;
    sample.trajectory.writer_id = rec["writer_id"].get<std::string>();
    sample.trajectory.letter = letter[0];
    for (const auto& p : rec["points"]) {
        if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
            !p[2].is_number())
            fail("format", "point is not a [x, y, t] triple");
        sample.trajectory.points.push_back(
            {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    if (sample.trajectory.points.size() < 2)
        fail("format", "fewer than 2 points");
    for (std::size_t i = 1; i < sample.trajectory.points.size(); ++i)
        if (sample.trajectory.points[i].t <= sample.trajectory.points[i - 1].t)
            fail("format", "non-monotonic timestamp at point " + std::to_string(i));
    return sample;
}

}  // namespace

std::vector<LetterSample> load_jsonl(const std::string& path, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot read " + path);
    std::vector<LetterSample> samples;
    LoadReport local;
    std::map<std::string, std::size_t> occurrence;  // (writer, letter) -> count
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            LetterSample sample = parse_record(json::parse(line));
            const std::string key =
                sample.trajectory.writer_id + ":" + sample.trajectory.letter;
            sample.id = key + ":" + std::to_string(occurrence[key]++);
            samples.push_back(std::move(sample));
            ++local.parsed;
        } catch (const json::parse_error& e) {
            local.errors.emplace_back(line_no, std::string("invalid JSON: ") + e.what());
        } catch (const Error& e) {
            local.errors.emplace_back(line_no, e.what());
        }
    }
    if (report) *report = std::move(local);
    return samples;
}

void save_jsonl(const std::vector<LetterSample>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot write " + path);
    for (const LetterSample& s : samples) {
        json rec;
        rec["writer_id"] = s.trajectory.writer_id;
        rec["letter"] = std::string(1, s.trajectory.letter);
        json pts = json::array();
        for (const TimedPoint& p : s.trajectory.points)
            pts.push_back(json::array({p.x, p.y, p.t}));
        rec["points"] = std::move(pts);
        out << rec.dump() << "\n";
    }
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

std::vector<LetterSample> clean(std::vector<LetterSample> samples,
                                std::size_t max_steps, double max_duration,
                                CleanReport* report) {
    CleanReport local;
    std::vector<LetterSample> kept;
    kept.reserve(samples.size());
    for (auto& s : samples) {
        std::size_t steps = 0;
        try {
            steps = displacements(s.trajectory).size();
        } catch (const Error&) {
            ++local.dropped["degenerate"];
            continue;
        }
        const double duration =
            s.trajectory.points.back().t - s.trajectory.points.front().t;
        if (steps > max_steps) {
            ++local.dropped["too_many_steps"];
            continue;
        }
        if (duration > max_duration) {
            ++local.dropped["too_long_duration"];
            continue;
        }
        kept.push_back(std::move(s));
    }
    local.kept = kept.size();
    if (report) *report = std::move(local);
    return kept;
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

namespace {

constexpr double kLetterSizePx = 90.0;
constexpr double kBaseSpeedPx = 650.0;

std::string writer_name(int index) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "w%03d", index);
    return buf;
}

using Point2 = std::array<double, 2>;

bool stroke_closed(const std::vector<Point2>& s) {
    return s.size() > 2 && std::fabs(s.front()[0] - s.back()[0]) < 1e-12 &&
           std::fabs(s.front()[1] - s.back()[1]) < 1e-12;
}

// Rotate a closed loop so it starts at the vertex nearest the given corner.
std::vector<Point2> rotate_loop(const std::vector<Point2>& s, int corner) {
    static const Point2 corners[4] = {{1, 1}, {0, 1}, {0, 0}, {1, 0}};
    const Point2 target = corners[corner & 3];
    std::vector<Point2> open(s.begin(), s.end() - 1);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < open.size(); ++i) {
        const double dx = open[i][0] - target[0], dy = open[i][1] - target[1];
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    std::vector<Point2> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i <= open.size(); ++i)
        out.push_back(open[(best + i) % open.size()]);
    return out;
}

}  // namespace

SynthStyle writer_style(std::uint64_t corpus_seed, int writer_index) {
    SeededRng rng = SeededRng(corpus_seed).fork(0x57524954u + writer_index);
    SynthStyle style;
    style.writer_id = writer_name(writer_index);
    style.slant_deg = rng.uniform(-18.0, 18.0);
    style.scale = rng.uniform(0.78, 1.25);
    style.speed_gain = rng.uniform(0.7, 1.4);
    for (bool& f : style.stroke_order_flip) f = rng.uniform() < 0.5;
    style.jitter_sigma = rng.uniform(0.25, 0.8);
    style.start_corner = static_cast<int>(rng.uniform_int(4));
    style.speed_warp = rng.uniform(0.1, 0.45);
    return style;
}

namespace {

Trajectory synth_letter(const SynthStyle& style, char letter, SeededRng rep_rng) {
    const LetterArchetype& arch = letter_archetype(letter);

    // pen-up transitions are joined: one polyline per letter
    std::vector<Point2> poly;
    for (const auto& stroke : arch.strokes) {
        const std::vector<Point2> s =
            stroke_closed(stroke) ? rotate_loop(stroke, style.start_corner) : stroke;
        for (const Point2& p : s) {
            if (!poly.empty() && poly.back() == p) continue;
            poly.push_back(p);
        }
    }
    if (style.stroke_order_flip[letter - 'A'])
        std::reverse(poly.begin(), poly.end());

    // per-writer affine: scale and slant (shear) around the box center
    const double shear = std::tan(style.slant_deg * std::numbers::pi / 180.0);
    const double size = kLetterSizePx * style.scale;
    for (Point2& p : poly) {
        const double cx = p[0] - 0.5, cy = p[1] - 0.5;
        p[0] = (cx + shear * cy) * size;
        p[1] = cy * size;
    }

    // arc-length table
    std::vector<double> cumulative{0.0};
    for (std::size_t i = 1; i < poly.size(); ++i) {
        const double dx = poly[i][0] - poly[i - 1][0];
        const double dy = poly[i][1] - poly[i - 1][1];
        cumulative.push_back(cumulative.back() + std::sqrt(dx * dx + dy * dy));
    }
    const double total_len = cumulative.back();

    // writer speed sets the duration; clamp keeps every sample clean
    double duration = total_len / (kBaseSpeedPx * style.speed_gain);
    duration *= rep_rng.uniform(0.95, 1.05);
    duration = std::clamp(duration, 0.3, 0.7);
    const int n_steps = std::clamp(static_cast<int>(std::lround(duration * 100.0)), 20, 90);

    auto point_at = [&](double s) -> Point2 {
        s = std::clamp(s, 0.0, total_len);
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), s);
        if (it == cumulative.begin()) return poly.front();
        const std::size_t hi = static_cast<std::size_t>(it - cumulative.begin());
        const double seg = cumulative[hi] - cumulative[hi - 1];
        const double f = seg > 0.0 ? (s - cumulative[hi - 1]) / seg : 0.0;
        return {poly[hi - 1][0] + f * (poly[hi][0] - poly[hi - 1][0]),
                poly[hi - 1][1] + f * (poly[hi][1] - poly[hi - 1][1])};
    };

    // resample at 100 Hz with a sinusoidal pace modulation along the path
    Trajectory traj;
    traj.writer_id = style.writer_id;
    traj.letter = letter;
    for (int k = 0; k <= n_steps; ++k) {
        const double tau = static_cast<double>(k) / n_steps;
        const double u = tau + style.speed_warp * std::sin(2.0 * std::numbers::pi * tau) /
                                   (2.0 * std::numbers::pi);
        Point2 p = point_at(u * total_len);
        p[0] += rep_rng.normal() * style.jitter_sigma;
        p[1] += rep_rng.normal() * style.jitter_sigma;
        traj.points.push_back({p[0], p[1], k * 0.01});
    }
    return traj;
}

}  // namespace

std::vector<LetterSample> synth_corpus(const SynthConfig& config) {
    if (config.n_writers <= 0 || config.reps_per_writer <= 0)
        fail("config", "synth_corpus: writer and repetition counts must be positive");
    std::set<char> seen;
    for (char c : config.alphabet) {
        letter_archetype(c);  // throws on unknown letters
        if (!seen.insert(c).second)
            fail("config", std::string("synth_corpus: duplicate letter '") + c + "'");
    }

    SeededRng corpus_rng(config.seed);
    std::vector<LetterSample> samples;
    samples.reserve(config.alphabet.size() * config.n_writers * config.reps_per_writer);
    for (int w = 0; w < config.n_writers; ++w) {
        const SynthStyle style = writer_style(config.seed, w);
        for (char letter : config.alphabet) {
            for (int rep = 0; rep < config.reps_per_writer; ++rep) {
                SeededRng rep_rng = corpus_rng.fork(
                    (static_cast<std::uint64_t>(w) << 24) ^
                    (static_cast<std::uint64_t>(letter) << 16) ^
                    static_cast<std::uint64_t>(rep));
                LetterSample sample;
                sample.trajectory = synth_letter(style, letter, rep_rng);
                sample.id = style.writer_id + ":" + letter + ":" + std::to_string(rep);
                samples.push_back(std::move(sample));
            }
        }
    }
    return samples;
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

namespace {

void splat(Raster& img, double px, double py, double weight) {
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0, fy = py - y0;
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int i = 0; i < 4; ++i) {
        if (xs[i] < 0 || ys[i] < 0 || xs[i] >= static_cast<int>(Raster::kSide) ||
            ys[i] >= static_cast<int>(Raster::kSide))
            continue;
        img.pixels[ys[i] * Raster::kSide + xs[i]] += weight * w[i];
    }
}

}  // namespace

Raster rasterize(const Trajectory& traj) {
    if (traj.points.empty()) fail("domain", "rasterize: empty trajectory");
    double min_x = traj.points[0].x, max_x = min_x;
    double min_y = traj.points[0].y, max_y = min_y;
    for (const TimedPoint& p : traj.points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max(max_x - min_x, max_y - min_y);

    Raster img;
    if (span <= 0.0) {
        // degenerate bounding box: centered dot
        splat(img, 13.5, 13.5, 1.0);
        for (double& v : img.pixels) v = std::min(v * 4.0, 1.0);
        return img;
    }

    const double usable = Raster::kSide - 1.0 - 4.0;  // 2 px margin each side
    const double scale = usable / span;
    const double off_x = 2.0 + 0.5 * (usable - (max_x - min_x) * scale);
    const double off_y = 2.0 + 0.5 * (usable - (max_y - min_y) * scale);
    auto to_px = [&](const TimedPoint& p) -> std::array<double, 2> {
        const double px = off_x + (p.x - min_x) * scale;
        const double py = (Raster::kSide - 1.0) - (off_y + (p.y - min_y) * scale);
        return {px, py};
    };

    constexpr double kStep = 0.25;   // marching step along each segment, px
    constexpr double kInk = 0.45;    // deposit per sample before clamping
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        const auto a = to_px(traj.points[i - 1]);
        const auto b = to_px(traj.points[i]);
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        const int n = std::max(1, static_cast<int>(std::ceil(len / kStep)));
        for (int k = (i == 1 ? 0 : 1); k <= n; ++k) {
            const double f = static_cast<double>(k) / n;
            splat(img, a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), kInk);
        }
    }
    for (double& v : img.pixels) v = std::min(v, 1.0);
    return img;
}

// ---------------------------------------------------------------------------
// Stratified split
// ---------------------------------------------------------------------------

void split_samples(std::vector<LetterSample>& samples,
                   const std::array<double, 3>& fractions, std::uint64_t seed,
                   StratifyBy stratify) {
    double sum = 0.0;
    for (double f : fractions) {
        if (f < 0.0) fail("config", "split fractions must be non-negative");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) fail("config", "split fractions must sum to 1");

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string key = stratify == StratifyBy::letter
                                    ? std::string(1, samples[i].trajectory.letter)
                                    : samples[i].trajectory.writer_id;
        groups[key].push_back(i);
    }

    std::uint64_t group_tag = 0;
    for (auto& [key, idx] : groups) {
        if (idx.size() < 3)
            fail("domain", "stratum '" + key + "' has fewer than 3 samples (" +
                               std::to_string(idx.size()) + ")");
        SeededRng rng = SeededRng(seed).fork(0x53504C49u + group_tag++);
        rng.shuffle(idx);
        const std::size_t n = idx.size();
        std::size_t n_val = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(fractions[1] * n)));
        std::size_t n_test = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(fractions[2] * n)));
        while (n_val + n_test + 1 > n) {
            if (n_val >= n_test && n_val > 1)
                --n_val;
            else
                --n_test;
        }
        const std::size_t n_train = n - n_val - n_test;
        for (std::size_t k = 0; k < n; ++k) {
            Split tag = k < n_train              ? Split::train
                        : k < n_train + n_val    ? Split::validation
                                                 : Split::test;
            samples[idx[k]].split_tag = tag;
        }
    }
}

}  // namespace strokegen
