#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grf {

enum class Split : std::uint8_t {
    Train = 0,
    Val = 1,
    Test = 2,
    Unassigned = 255,
};

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct DatasetItem {
    std::string id;
    std::uint32_t label = 0;
    Split split = Split::Unassigned;
};

// N feature vectors with labels, ids, and split tags. Features are a flat
// row-major n*d float array; training math widens to double at the tensor
// boundary.
struct FeatureDataset {
    std::vector<DatasetItem> items;
    std::vector<float> features; // n * d, row-major
    std::size_t d = 0;
    std::vector<std::string> class_names;

    std::size_t n() const { return items.size(); }
    std::size_t num_classes() const { return class_names.size(); }

    const float* row(std::size_t i) const { return features.data() + i * d; }
    float* row(std::size_t i) { return features.data() + i * d; }

    std::vector<std::size_t> split_indices(Split s) const;
    std::size_t split_count(Split s) const;

    // Enforces the dataset invariants; throws DataError on violation.
    void validate() const;
};

struct SplitRatios {
    double train = 0.70;
    double val = 0.10;
    double test = 0.20;

    void validate() const;
};

FeatureDataset load_csv(const std::string& path);
void save_csv(const FeatureDataset& ds, const std::string& path);

// Binary dataset format, magic "GRFD" (see README for the layout).
void save_binary(const FeatureDataset& ds, const std::string& path);
FeatureDataset load_binary(const std::string& path);
std::string serialize_dataset(const FeatureDataset& ds);
FeatureDataset parse_dataset(std::string_view bytes);

// Stratified random split: per-class counts match the ratios within one
// item. Deterministic for a fixed seed; only split tags change.
FeatureDataset assign_splits(const FeatureDataset& ds, const SplitRatios& ratios,
                             std::uint64_t seed);

// Gaussian blobs around orthogonal class centers (separation * e_c), used by
// the synthetic acceptance runs. Requires d >= classes.
FeatureDataset synth_clusters(std::size_t n_per_class, std::size_t classes,
                              std::size_t d, double separation, double noise_sigma,
                              std::uint64_t seed);

} // namespace grf
