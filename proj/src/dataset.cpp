#include "grf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "grf/binio.hpp"
#include "grf/error.hpp"
#include "grf/rng.hpp"

namespace grf {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
        default: return "";
    }
}

Split split_from_name(const std::string& name) {
    if (name.empty()) return Split::Unassigned;
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw DataError("unknown split tag: '" + name + "'");
}

std::vector<std::size_t> FeatureDataset::split_indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].split == s) out.push_back(i);
    return out;
}

std::size_t FeatureDataset::split_count(Split s) const {
    std::size_t c = 0;
    for (const auto& it : items)
        if (it.split == s) ++c;
    return c;
}

void FeatureDataset::validate() const {
    if (items.empty()) throw DataError("empty dataset: n must be >= 1");
    if (d < 1) throw DataError("feature dimension must be >= 1");
    if (features.size() != items.size() * d)
        throw DataError("feature buffer does not match n * d");
    if (class_names.empty()) throw DataError("dataset has no classes");

    std::unordered_set<std::string> seen;
    seen.reserve(items.size());
    std::vector<bool> label_present(class_names.size(), false);
    bool fully_assigned = true;
    for (const auto& it : items) {
        if (!seen.insert(it.id).second) throw DataError("duplicate item id: " + it.id);
        if (it.label >= class_names.size())
            throw DataError("label " + std::to_string(it.label) + " out of range for " +
                            std::to_string(class_names.size()) + " classes");
        label_present[it.label] = true;
        if (it.split == Split::Unassigned) fully_assigned = false;
    }
    for (std::size_t c = 0; c < label_present.size(); ++c)
        if (!label_present[c])
            throw DataError("labels are not contiguous: class " + std::to_string(c) +
                            " has no members");
    for (float f : features)
        if (!std::isfinite(f)) throw DataError("non-finite feature value");

    if (fully_assigned && items.size() >= 10) {
        for (Split s : {Split::Train, Split::Val, Split::Test})
            if (split_count(s) == 0)
                throw DataError(std::string("split '") + split_name(s) +
                                "' is empty for a dataset with n >= 10");
    }
}

void SplitRatios::validate() const {
    for (double v : {train, val, test})
        if (!(v > 0.0 && v < 1.0)) throw ParamError("split ratios must lie in (0,1)");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw ParamError("split ratios must sum to 1");
}

// ---- CSV ----

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> default_class_names(std::size_t c) {
    std::vector<std::string> names;
    names.reserve(c);
    for (std::size_t i = 0; i < c; ++i) names.push_back("class_" + std::to_string(i));
    return names;
}

} // namespace

FeatureDataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    strip_cr(line);

    auto header = split_line(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "label" || header[2] != "split")
        throw DataError(path + ": malformed header, expected id,label,split,f0,...");
    std::size_t d = header.size() - 3;
    for (std::size_t j = 0; j < d; ++j) {
        if (header[3 + j] != "f" + std::to_string(j))
            throw DataError(path + ": malformed header, expected column f" + std::to_string(j));
    }

    FeatureDataset ds;
    ds.d = d;
    std::uint32_t max_label = 0;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        strip_cr(line);
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != 3 + d)
            throw DataError(path + ": row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size() - 3) + " features, expected " +
                            std::to_string(d));
        DatasetItem item;
        item.id = cells[0];
        long label = -1;
        auto [lp, lec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
        if (lec != std::errc() || lp != cells[1].data() + cells[1].size() || label < 0)
            throw DataError(path + ": row " + std::to_string(row_no) +
                            ": label must be a non-negative integer, got '" + cells[1] + "'");
        item.label = static_cast<std::uint32_t>(label);
        max_label = std::max(max_label, item.label);
        item.split = split_from_name(cells[2]);
        for (std::size_t j = 0; j < d; ++j) {
            const std::string& cell = cells[3 + j];
            float v = 0.0f;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size())
                throw DataError(path + ": row " + std::to_string(row_no) +
                                ": non-numeric feature '" + cell + "' in column f" +
                                std::to_string(j));
            ds.features.push_back(v);
        }
        ds.items.push_back(std::move(item));
    }
    if (ds.items.empty()) throw DataError(path + ": no data rows");
    ds.class_names = default_class_names(static_cast<std::size_t>(max_label) + 1);
    ds.validate();
    return ds;
}

void save_csv(const FeatureDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "id,label,split";
    for (std::size_t j = 0; j < ds.d; ++j) out << ",f" << j;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto& it = ds.items[i];
        out << it.id << ',' << it.label << ',' << split_name(it.split);
        const float* row = ds.row(i);
        for (std::size_t j = 0; j < ds.d; ++j) {
            // %.9g round-trips binary32 exactly
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(row[j]));
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError("write failure: " + path);
}

// ---- binary format (GRFD) ----

std::string serialize_dataset(const FeatureDataset& ds) {
    ds.validate();
    bin::Writer w;
    w.bytes("GRFD", 4);
    w.u32(1);
    w.u64(ds.n());
    w.u64(ds.d);
    w.u64(ds.num_classes());
    for (float f : ds.features) w.f32(f);
    for (const auto& it : ds.items) w.u32(it.label);
    for (const auto& it : ds.items) w.u8(static_cast<std::uint8_t>(it.split));
    for (const auto& it : ds.items) w.str(it.id);
    for (const auto& name : ds.class_names) w.str(name);
    return w.take();
}

FeatureDataset parse_dataset(std::string_view bytes) {
    bin::Reader r(bytes);
    bin::expect_magic(r, "GRFD", "dataset");
    std::uint32_t version = r.u32();
    if (version != 1)
        throw DataError("unsupported dataset format version " + std::to_string(version));
    std::uint64_t n = r.u64();
    std::uint64_t d = r.u64();
    std::uint64_t c = r.u64();
    if (n == 0) throw DataError("empty dataset: n must be >= 1");
    if (d == 0) throw DataError("feature dimension must be >= 1");

    FeatureDataset ds;
    ds.d = d;
    ds.features.resize(n * d);
    for (auto& f : ds.features) f = r.f32();
    ds.items.resize(n);
    for (auto& it : ds.items) it.label = r.u32();
    for (auto& it : ds.items) {
        std::uint8_t code = r.u8();
        if (code > 2 && code != 255)
            throw DataError("invalid split code " + std::to_string(code));
        it.split = static_cast<Split>(code);
    }
    for (auto& it : ds.items) it.id = r.str();
    ds.class_names.resize(c);
    for (auto& name : ds.class_names) name = r.str();
    ds.validate();
    return ds;
}

void save_binary(const FeatureDataset& ds, const std::string& path) {
    bin::write_file(path, serialize_dataset(ds));
}

FeatureDataset load_binary(const std::string& path) {
    return parse_dataset(bin::read_file(path));
}

// ---- stratified split ----

FeatureDataset assign_splits(const FeatureDataset& ds, const SplitRatios& ratios,
                             std::uint64_t seed) {
    ds.validate();
    ratios.validate();

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
    for (std::size_t i = 0; i < ds.n(); ++i) by_class[ds.items[i].label].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].size() < 3)
            throw ParamError("stratification requires >= 3 members per class; class " +
                             std::to_string(c) + " has " + std::to_string(by_class[c].size()));

    FeatureDataset out = ds;
    RngStream rng = RngStream::derive(seed, 0x5354524154ULL);
    const double ratio[3] = {ratios.train, ratios.val, ratios.test};

    for (auto& members : by_class) {
        // Fisher-Yates over the class member list
        for (std::size_t i = members.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
            std::swap(members[i - 1], members[j]);
        }
        // largest-remainder apportioning of the class across splits
        std::size_t m = members.size();
        std::size_t count[3];
        double remainder[3];
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            double target = ratio[s] * static_cast<double>(m);
            count[s] = static_cast<std::size_t>(target);
            remainder[s] = target - static_cast<double>(count[s]);
            assigned += count[s];
        }
        while (assigned < m) {
            int best = 0;
            for (int s = 1; s < 3; ++s)
                if (remainder[s] > remainder[best]) best = s;
            ++count[best];
            remainder[best] = -1.0;
            ++assigned;
        }
        std::size_t pos = 0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t i = 0; i < count[s]; ++i)
                out.items[members[pos++]].split = static_cast<Split>(s);
    }

    // Rounding can starve a split on small classes; repair by moving one item
    // from the most populated (class, split) cell so the n >= 10 invariant holds.
    if (out.n() >= 10) {
        for (Split s : {Split::Train, Split::Val, Split::Test}) {
            if (out.split_count(s) > 0) continue;
            std::size_t best_item = out.n();
            std::size_t best_count = 1; // donor cell must keep at least one member
            for (std::size_t c = 0; c < by_class.size(); ++c) {
                for (Split donor : {Split::Train, Split::Val, Split::Test}) {
                    if (donor == s) continue;
                    std::size_t cell = 0, candidate = out.n();
                    for (std::size_t idx : by_class[c])
                        if (out.items[idx].split == donor) {
                            ++cell;
                            candidate = idx;
                        }
                    if (cell > best_count) {
                        best_count = cell;
                        best_item = candidate;
                    }
                }
            }
            if (best_item < out.n()) out.items[best_item].split = s;
        }
    }

    out.validate();
    return out;
}

// ---- synthetic clusters ----

FeatureDataset synth_clusters(std::size_t n_per_class, std::size_t classes, std::size_t d,
                              double separation, double noise_sigma, std::uint64_t seed) {
    if (n_per_class < 1 || classes < 1 || d < 1)
        throw ParamError("synth_clusters: counts must be >= 1");
    if (!(separation > 0.0)) throw ParamError("synth_clusters: separation must be > 0");
    if (noise_sigma < 0.0) throw ParamError("synth_clusters: noise_sigma must be >= 0");
    if (d < classes)
        throw ParamError("synth_clusters: d (" + std::to_string(d) +
                         ") must be >= classes (" + std::to_string(classes) +
                         ") for orthogonal centers");

    FeatureDataset ds;
    ds.d = d;
    ds.class_names.reserve(classes);
    for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back("class_" + std::to_string(c));

    RngStream rng = RngStream::derive(seed, 0x53594e5448ULL);
    ds.features.reserve(n_per_class * classes * d);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            DatasetItem item;
            item.id = "c" + std::to_string(c) + "_" + std::to_string(i);
            item.label = static_cast<std::uint32_t>(c);
            ds.items.push_back(std::move(item));
            for (std::size_t j = 0; j < d; ++j) {
                double center = (j == c) ? separation : 0.0;
                double noise = (noise_sigma > 0.0) ? noise_sigma * rng.normal() : 0.0;
                ds.features.push_back(static_cast<float>(center + noise));
            }
        }
    }
    ds.validate();
    return ds;
}

} // namespace grf
