// Copyright 2026 The LOE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "loe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "loe/errors.hpp"
#include "loe/io_util.hpp"

namespace loe {

std::size_t Dataset::anomaly_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

namespace {

void draw_component_row(const GaussianComponent& comp, Rng& rng, double* out) {
    const double sd = std::sqrt(comp.variance);
    for (std::size_t d = 0; d < comp.mean.size(); ++d) {
        out[d] = comp.mean[d] + sd * rng.normal();
    }
}

// Weight-proportional component choice among the components of one role.
const GaussianComponent& pick_component(const std::vector<const GaussianComponent*>& comps,
                                        double total_weight, Rng& rng) {
    double u = rng.uniform() * total_weight;
    for (const GaussianComponent* c : comps) {
        u -= c->weight;
        if (u < 0.0) return *c;
    }
    return *comps.back();
}

}  // namespace

Dataset sample_mixture(const GaussianMixtureSpec& spec, std::size_t n_normal,
                       std::size_t n_anomaly, Rng& rng) {
    std::vector<const GaussianComponent*> normal_comps, anomaly_comps;
    double normal_weight = 0.0, anomaly_weight = 0.0;
    std::size_t dims = 0;
    for (const GaussianComponent& c : spec.components) {
        if (c.weight <= 0.0) throw ConfigError("mixture: component weights must be positive");
        if (c.variance <= 0.0) throw ConfigError("mixture: component variances must be positive");
        if (dims == 0) dims = c.mean.size();
        if (c.mean.size() != dims) throw ConfigError("mixture: component dimensions differ");
        if (c.anomaly) {
            anomaly_comps.push_back(&c);
            anomaly_weight += c.weight;
        } else {
            normal_comps.push_back(&c);
            normal_weight += c.weight;
        }
    }
    if (n_normal > 0 && normal_comps.empty()) throw ConfigError("mixture: no normal components");
    if (n_anomaly > 0 && anomaly_comps.empty()) throw ConfigError("mixture: no anomaly components");

    Dataset ds;
    ds.features = Matrix(n_normal + n_anomaly, dims);
    ds.labels.assign(n_normal + n_anomaly, 0);
    for (std::size_t i = 0; i < n_normal; ++i) {
        const GaussianComponent& c = normal_comps.size() == 1
                                         ? *normal_comps[0]
                                         : pick_component(normal_comps, normal_weight, rng);
        draw_component_row(c, rng, ds.features.data.data() + i * dims);
    }
    for (std::size_t i = 0; i < n_anomaly; ++i) {
        const GaussianComponent& c = anomaly_comps.size() == 1
                                         ? *anomaly_comps[0]
                                         : pick_component(anomaly_comps, anomaly_weight, rng);
        draw_component_row(c, rng, ds.features.data.data() + (n_normal + i) * dims);
        ds.labels[n_normal + i] = 1;
    }
    ds.alpha0 = n_normal + n_anomaly == 0
                    ? 0.0
                    : static_cast<double>(n_anomaly) / static_cast<double>(n_normal + n_anomaly);
    return ds;
}

GaussianMixtureSpec toy_mixture_spec() {
    GaussianMixtureSpec spec;
    spec.components.push_back({{1.0, 1.0}, 0.07, 1.0, false});
    spec.components.push_back({{-0.25, 2.5}, 0.03, 0.5, true});
    spec.components.push_back({{-1.0, 0.5}, 0.03, 0.5, true});
    return spec;
}

Dataset gen_toy(std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds = sample_mixture(toy_mixture_spec(), 90, 10, rng);
    ds.provenance = "toy";
    ds.alpha0 = 0.1;
    return ds;
}

GaussianMixtureSpec two_cluster_tabular_spec(std::size_t dims, double separation,
                                             double anomaly_variance) {
    if (dims == 0) throw ConfigError("tabular spec: dims must be positive");
    // Normal mass sits off the origin along the all-ones direction so it has
    // learnable directional structure; the anomaly clusters sit on an
    // orthogonal alternating-sign axis (orthogonal for even dims).
    const double unit = separation / std::sqrt(static_cast<double>(dims));
    std::vector<double> m0(dims, unit), m1(dims), m2(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        m1[d] = (d % 2 == 0) ? unit : -unit;
        m2[d] = -m1[d];
    }
    GaussianMixtureSpec spec;
    spec.components.push_back({std::move(m0), 1.0, 1.0, false});
    spec.components.push_back({std::move(m1), anomaly_variance, 0.5, true});
    spec.components.push_back({std::move(m2), anomaly_variance, 0.5, true});
    return spec;
}

Dataset contaminate(const Matrix& normals, const Matrix& anomaly_pool, double alpha0,
                    std::uint64_t seed) {
    if (alpha0 < 0.0 || alpha0 >= 1.0) {
        throw ConfigError("contaminate: alpha0 must be in [0, 1)");
    }
    const std::size_t n = normals.rows;
    if (alpha0 == 0.0) {
        Dataset ds;
        ds.features = normals;
        ds.labels.assign(n, 0);
        ds.alpha0 = 0.0;
        ds.provenance = "csv";
        return ds;
    }
    if (anomaly_pool.rows == 0) throw ConfigError("contaminate: empty anomaly pool");
    if (anomaly_pool.cols != normals.cols) {
        throw ConfigError("contaminate: pool has " + std::to_string(anomaly_pool.cols) +
                          " features, normals have " + std::to_string(normals.cols));
    }

    // k / (k + n) = alpha0  =>  k = alpha0 * n / (1 - alpha0), rounded.
    const std::size_t k = static_cast<std::size_t>(
        std::llround(alpha0 * static_cast<double>(n) / (1.0 - alpha0)));

    // Per-feature sample variance of the pool; the injected noise matches it.
    const std::size_t d = anomaly_pool.cols;
    std::vector<double> noise_sd(d, 0.0);
    if (anomaly_pool.rows > 1) {
        for (std::size_t c = 0; c < d; ++c) {
            double mean = 0.0;
            for (std::size_t r = 0; r < anomaly_pool.rows; ++r) mean += anomaly_pool.at(r, c);
            mean /= static_cast<double>(anomaly_pool.rows);
            double ss = 0.0;
            for (std::size_t r = 0; r < anomaly_pool.rows; ++r) {
                const double dev = anomaly_pool.at(r, c) - mean;
                ss += dev * dev;
            }
            noise_sd[c] = std::sqrt(ss / static_cast<double>(anomaly_pool.rows - 1));
        }
    }

    Rng rng = Rng::derive(seed, 0x636f6e74);  // "cont"
    std::vector<std::size_t> picks;
    picks.reserve(k);
    if (k <= anomaly_pool.rows) {
        std::vector<std::size_t> order(anomaly_pool.rows);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        picks.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
        for (std::size_t i = 0; i < k; ++i) picks.push_back(rng.below(anomaly_pool.rows));
    }

    Dataset ds;
    ds.features = Matrix(n + k, d);
    ds.labels.assign(n + k, 0);
    std::copy(normals.data.begin(), normals.data.end(), ds.features.data.begin());
    for (std::size_t i = 0; i < k; ++i) {
        double* out = ds.features.data.data() + (n + i) * d;
        const auto src = anomaly_pool.row(picks[i]);
        for (std::size_t c = 0; c < d; ++c) out[c] = src[c] + noise_sd[c] * rng.normal();
        ds.labels[n + i] = 1;
    }

    std::vector<std::size_t> perm(n + k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    Dataset shuffled;
    shuffled.features = Matrix(n + k, d);
    shuffled.labels.assign(n + k, 0);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto src = ds.features.row(perm[i]);
        std::copy(src.begin(), src.end(), shuffled.features.data.begin() + static_cast<std::ptrdiff_t>(i * d));
        shuffled.labels[i] = ds.labels[perm[i]];
    }
    shuffled.alpha0 = alpha0;
    shuffled.provenance = "csv";
    return shuffled;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw ConfigError("split: test fraction must be in (0, 1)");
    }
    Rng rng = Rng::derive(seed, 0x73706c69);  // "spli"

    std::vector<std::vector<std::size_t>> strata;
    if (ds.has_labels()) {
        strata.resize(2);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            strata[static_cast<std::size_t>(ds.labels[i])].push_back(i);
        }
    } else {
        strata.resize(1);
        strata[0].resize(ds.size());
        std::iota(strata[0].begin(), strata[0].end(), std::size_t{0});
    }

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t s = 0; s < strata.size(); ++s) {
        auto& idx = strata[s];
        if (idx.empty()) continue;
        const std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        if (n_test == 0 || n_test == idx.size()) {
            throw DataError("split: stratum " + std::to_string(s) + " with " +
                            std::to_string(idx.size()) +
                            " samples cannot honor test fraction " + std::to_string(test_fraction));
        }
        rng.shuffle(idx);
        test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto take = [&](const std::vector<std::size_t>& rows) {
        Dataset out;
        out.features = Matrix(rows.size(), ds.dim());
        if (ds.has_labels()) out.labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = ds.features.row(rows[i]);
            std::copy(src.begin(), src.end(),
                      out.features.data.begin() + static_cast<std::ptrdiff_t>(i * ds.dim()));
            if (ds.has_labels()) out.labels[i] = ds.labels[rows[i]];
        }
        out.alpha0 = ds.alpha0;
        out.provenance = ds.provenance;
        return out;
    };
    return {take(train_idx), take(test_idx)};
}

namespace {

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    if (header.empty()) throw DataError(path + ": empty header row");

    // A fully numeric first row means the header is missing.
    bool all_numeric = true;
    for (const std::string& h : header) {
        double unused;
        if (!parse_double(h, unused)) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric) throw DataError(path + ": missing header row (first row is numeric)");

    std::ptrdiff_t label_col = -1;
    if (label_column) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == *label_column) {
                label_col = static_cast<std::ptrdiff_t>(c);
                break;
            }
        }
        if (label_col < 0) {
            throw DataError(path + ": label column '" + *label_column + "' not found in header");
        }
    }

    const std::size_t width = header.size();
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t n_rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != width) {
            throw DataError(path + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            double v;
            if (!parse_double(fields[c], v)) {
                throw DataError(path + ": row " + std::to_string(line_no) + ", column " +
                                std::to_string(c + 1) + " ('" + header[c] +
                                "'): not a number: '" + fields[c] + "'");
            }
            if (!std::isfinite(v)) {
                throw DataError(path + ": row " + std::to_string(line_no) + ", column " +
                                std::to_string(c + 1) + ": value is not finite: '" + fields[c] +
                                "'");
            }
            if (static_cast<std::ptrdiff_t>(c) == label_col) {
                if (v != 0.0 && v != 1.0) {
                    throw DataError(path + ": row " + std::to_string(line_no) + ", column " +
                                    std::to_string(c + 1) + ": label must be 0 or 1, got '" +
                                    fields[c] + "'");
                }
                labels.push_back(static_cast<int>(v));
            } else {
                values.push_back(v);
            }
        }
        ++n_rows;
    }
    if (n_rows == 0) throw DataError(path + ": no data rows");

    Dataset ds;
    ds.features.rows = n_rows;
    ds.features.cols = width - (label_col >= 0 ? 1 : 0);
    ds.features.data = std::move(values);
    ds.labels = std::move(labels);
    ds.provenance = "csv";
    if (ds.has_labels() && !ds.labels.empty()) {
        ds.alpha0 = static_cast<double>(ds.anomaly_count()) / static_cast<double>(n_rows);
    }
    return ds;
}

void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (std::size_t c = 0; c < ds.dim(); ++c) {
        if (c) out << ',';
        out << 'f' << c;
    }
    if (ds.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.dim(); ++c) {
            if (c) out << ',';
            out << format_double(ds.features.at(r, c));
        }
        if (ds.has_labels()) out << ',' << ds.labels[r];
        out << '\n';
    }
}

void save_manifest(const std::string& path, const Dataset& ds, std::uint64_t seed) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["provenance"] = ds.provenance;
    j["n"] = ds.size();
    j["d"] = ds.dim();
    j["alpha0"] = ds.alpha0;
    j["seed"] = seed;
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace loe
