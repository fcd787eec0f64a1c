#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "grf/dataset.hpp"
#include "grf/rng.hpp"
#include "grf/tensor.hpp"

namespace testutil {

inline std::string temp_path(const std::string& name) {
    std::filesystem::create_directories("test_tmp");
    return "test_tmp/" + name;
}

inline grf::TensorPtr random_tensor(int rows, int cols, grf::RngStream& rng,
                                    bool requires_grad = true, double lo = -1.0,
                                    double hi = 1.0) {
    auto t = grf::make_tensor(rows, cols, 0.0, requires_grad);
    for (auto& v : t->data) v = lo + (hi - lo) * rng.uniform();
    return t;
}

// gaussian blob dataset with random labels (for graph tests)
inline grf::FeatureDataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                          std::size_t classes = 1) {
    grf::FeatureDataset ds;
    ds.d = d;
    grf::RngStream rng(seed);
    for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back("class_" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        grf::DatasetItem item;
        item.id = "p" + std::to_string(i);
        item.label = static_cast<std::uint32_t>(i % classes);
        ds.items.push_back(std::move(item));
        for (std::size_t j = 0; j < d; ++j)
            ds.features.push_back(static_cast<float>(rng.normal()));
    }
    return ds;
}

inline double sq_distance(const float* a, const float* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        s += diff * diff;
    }
    return s;
}

// independent brute-force neighbor oracle: k smallest (distance, index)
inline std::vector<std::size_t> brute_force_knn(const grf::FeatureDataset& ds, const float* q,
                                                std::size_t self, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < ds.n(); ++j) {
        if (j == self) continue;
        all.emplace_back(sq_distance(q, ds.row(j), ds.d), j);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
    return out;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-3);
}

// central finite differences of f() against an analytic gradient snapshot
inline double fd_max_rel_err(const std::function<double()>& f, const grf::TensorPtr& t,
                             const std::vector<double>& analytic, double h = 1e-5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < t->data.size(); ++i) {
        double orig = t->data[i];
        t->data[i] = orig + h;
        double fp = f();
        t->data[i] = orig - h;
        double fm = f();
        t->data[i] = orig;
        double fd = (fp - fm) / (2.0 * h);
        worst = std::max(worst, rel_err(fd, analytic[i]));
    }
    return worst;
}

} // namespace testutil
