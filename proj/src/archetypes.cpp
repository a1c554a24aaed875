#include <cmath>
#include <map>
#include <numbers>

#include "strokegen/dataset.hpp"
#include "strokegen/error.hpp"

namespace strokegen {

namespace {

using Stroke = std::vector<std::array<double, 2>>;

Stroke arc(double cx, double cy, double r, double from_deg, double to_deg,
           int segments, bool close = false) {
    Stroke s;
    for (int i = 0; i <= segments; ++i) {
        const double a = (from_deg + (to_deg - from_deg) * i / segments) *
                         std::numbers::pi / 180.0;
        s.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    if (close) s.push_back(s.front());
    return s;
}

std::map<char, LetterArchetype> build_archetypes() {
    std::map<char, LetterArchetype> m;
    auto add = [&m](char c, std::vector<Stroke> strokes) {
        m[c] = LetterArchetype{c, std::move(strokes)};
    };
    add('A', {{{0, 0}, {0.5, 1}, {1, 0}}, {{0.22, 0.4}, {0.78, 0.4}}});
    add('B', {{{0, 0}, {0, 1}},
              {{0, 1}, {0.55, 1}, {0.7, 0.87}, {0.7, 0.63}, {0.55, 0.52}, {0, 0.52}},
              {{0, 0.52}, {0.6, 0.5}, {0.78, 0.36}, {0.78, 0.13}, {0.6, 0}, {0, 0}}});
    add('C', {arc(0.5, 0.5, 0.48, 45, 315, 12)});
    add('D', {{{0, 0}, {0, 1}},
              {{0, 1}, {0.45, 0.98}, {0.8, 0.7}, {0.8, 0.3}, {0.45, 0.02}, {0, 0}}});
    add('E', {{{1, 1}, {0, 1}, {0, 0}, {1, 0}}, {{0, 0.5}, {0.75, 0.5}}});
    add('F', {{{1, 1}, {0, 1}, {0, 0}}, {{0, 0.5}, {0.7, 0.5}}});
    {
        Stroke g = arc(0.5, 0.5, 0.48, 45, 290, 11);
        g.push_back({0.95, 0.4});
        g.push_back({0.58, 0.4});
        add('G', {g});
    }
    add('H', {{{0, 0}, {0, 1}}, {{0, 0.5}, {1, 0.5}}, {{1, 1}, {1, 0}}});
    add('I', {{{0.3, 1}, {0.7, 1}}, {{0.5, 1}, {0.5, 0}}, {{0.3, 0}, {0.7, 0}}});
    add('J', {{{0.3, 1}, {0.75, 1}},
              {{0.6, 1}, {0.6, 0.18}, {0.45, 0.02}, {0.25, 0.05}, {0.15, 0.22}}});
    add('K', {{{0, 0}, {0, 1}}, {{0.85, 1}, {0.05, 0.48}, {0.9, 0}}});
    add('L', {{{0, 1}, {0, 0}, {0.85, 0}}});
    add('M', {{{0, 0}, {0.02, 1}, {0.5, 0.35}, {0.98, 1}, {1, 0}}});
    add('N', {{{0, 0}, {0.02, 1}, {0.98, 0}, {1, 1}}});
    add('O', {arc(0.5, 0.5, 0.48, 90, 427.5, 15, true)});
    add('P', {{{0, 0}, {0, 1}, {0.55, 0.98}, {0.75, 0.85}, {0.75, 0.62},
               {0.55, 0.5}, {0, 0.5}}});
    {
        Stroke q = arc(0.5, 0.5, 0.48, 90, 427.5, 15, true);
        add('Q', {q, {{0.62, 0.3}, {1.0, -0.08}}});
    }
    add('R', {{{0, 0}, {0, 1}, {0.55, 0.98}, {0.75, 0.85}, {0.75, 0.62},
               {0.55, 0.5}, {0, 0.5}},
              {{0.3, 0.5}, {0.95, 0}}});
    add('S', {{{0.85, 0.85}, {0.6, 1}, {0.3, 1}, {0.12, 0.85}, {0.12, 0.68},
               {0.3, 0.55}, {0.7, 0.45}, {0.88, 0.32}, {0.88, 0.15}, {0.7, 0},
               {0.35, 0}, {0.12, 0.13}}});
    add('T', {{{0, 1}, {1, 1}}, {{0.5, 1}, {0.5, 0}}});
    add('U', {{{0, 1}, {0, 0.25}, {0.18, 0.04}, {0.5, 0}, {0.82, 0.04},
               {1, 0.25}, {1, 1}}});
    add('V', {{{0, 1}, {0.5, 0}, {1, 1}}});
    add('W', {{{0, 1}, {0.25, 0}, {0.5, 0.6}, {0.75, 0}, {1, 1}}});
    add('X', {{{0, 1}, {1, 0}}, {{1, 1}, {0, 0}}});
    add('Y', {{{0, 1}, {0.5, 0.52}}, {{1, 1}, {0.5, 0.52}}, {{0.5, 0.52}, {0.5, 0}}});
    add('Z', {{{0, 1}, {1, 1}, {0, 0}, {1, 0}}});
    return m;
}

}  // namespace

const LetterArchetype& letter_archetype(char letter) {
    static const std::map<char, LetterArchetype> archetypes = build_archetypes();
    auto it = archetypes.find(letter);
    if (it == archetypes.end())
        fail("domain", std::string("no archetype for letter '") + letter + "'");
    return it->second;
}

}  // namespace strokegen
