#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <tabsynth/rng.hpp>
#include <tabsynth/table.hpp>

namespace tabsynth::testfix {

// Small mixed-type table with known structure: two correlated numericals,
// one mixed numerical with spikes at 3.5 and 7.0, a binary flag driven by
// weight, and a four-level grade driven by ratio.
inline RawTable mixed_fixture(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    RawTable t;
    t.rows = n;
    Column weight, ratio, dose, flag, grade;
    weight.name = "weight";
    ratio.name = "ratio";
    dose.name = "dose";
    flag.name = "flag";
    flag.text = true;
    grade.name = "grade";
    grade.text = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 5.0 + 2.0 * rng.normal();
        const double r = 0.8 * w + 0.6 * rng.normal();
        const bool f = w + 0.5 * rng.normal() > 5.0;
        const double u = rng.uniform(0.0, 1.0);
        double d;
        if (u < 0.30)
            d = 3.5;
        else if (u < 0.45)
            d = 7.0;
        else
            d = rng.uniform(0.0, 9.0) + (f ? 1.0 : 0.0);
        std::string g;
        if (r < 2.847)
            g = "a";
        else if (r < 4.0)
            g = "b";
        else if (r < 5.153)
            g = "c";
        else
            g = "d";
        weight.nums.push_back(w);
        ratio.nums.push_back(r);
        dose.nums.push_back(d);
        flag.texts.push_back(f ? "yes" : "no");
        grade.texts.push_back(g);
    }
    t.cols = {weight, ratio, dose, flag, grade};
    return t;
}

// Purely numeric regression fixture: y = 2*a - b + noise.
inline RawTable regression_fixture(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    RawTable t;
    t.rows = n;
    Column a, b, y;
    a.name = "a";
    b.name = "b";
    y.name = "y";
    for (std::size_t i = 0; i < n; ++i) {
        const double av = rng.normal();
        const double bv = rng.normal();
        a.nums.push_back(av);
        b.nums.push_back(bv);
        y.nums.push_back(2.0 * av - bv + 0.1 * rng.normal());
    }
    t.cols = {a, b, y};
    return t;
}

}  // namespace tabsynth::testfix
