#include "isoprob/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "detail/linalg.hpp"
#include "isoprob/errors.hpp"

namespace isoprob {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

double parse_double(std::string_view field, std::size_t line, const std::string& what) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("cannot parse " + what + " from '" + std::string(field) + "'", line);
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

LabeledDataset::LabeledDataset(std::size_t dim, std::vector<double> coords,
                               std::vector<int> labels, std::vector<double> base_weights)
    : dim_(dim),
      coords_(std::move(coords)),
      labels_(std::move(labels)),
      base_weights_(std::move(base_weights)) {
    if (dim_ == 0) throw ConfigError("dataset dimension must be >= 1");
    if (labels_.size() < 2) throw ConfigError("dataset needs at least 2 points");
    if (coords_.size() != labels_.size() * dim_) {
        throw ConfigError("coords size does not match labels * dim");
    }
    if (base_weights_.empty()) {
        base_weights_.assign(labels_.size(), 1.0);
    } else if (base_weights_.size() != labels_.size()) {
        throw ConfigError("base_weights size does not match point count");
    }
    n_plus_ = 0;
    for (int y : labels_) {
        if (y != 1 && y != -1) throw ConfigError("labels must be +1 or -1");
        if (y == 1) ++n_plus_;
    }
    if (n_plus_ == 0 || n_plus_ == labels_.size()) {
        throw ConfigError("both labels must be present at least once");
    }
    for (double w : base_weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("base weights must be positive");
    }
    for (double c : coords_) {
        if (!std::isfinite(c)) throw ConfigError("coordinates must be finite");
    }
}

std::vector<std::pair<double, double>> LabeledDataset::bounds() const {
    std::vector<std::pair<double, double>> out(
        dim_, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (std::size_t i = 0; i < size(); ++i) {
        auto p = point(i);
        for (std::size_t k = 0; k < dim_; ++k) {
            out[k].first = std::min(out[k].first, p[k]);
            out[k].second = std::max(out[k].second, p[k]);
        }
    }
    return out;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<double> coords;
    std::vector<int> labels;
    std::vector<double> weights;
    coords.reserve(indices.size() * dim_);
    labels.reserve(indices.size());
    weights.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) throw ConfigError("subset index out of range");
        auto p = point(i);
        coords.insert(coords.end(), p.begin(), p.end());
        labels.push_back(labels_[i]);
        weights.push_back(base_weights_[i]);
    }
    return LabeledDataset(dim_, std::move(coords), std::move(labels), std::move(weights));
}

ClassWeights derive_class_weights(double theta, std::size_t n_plus, std::size_t n_minus) {
    if (!(theta > 0.0) || !(theta < 1.0)) {
        throw ConfigError("theta must lie in the open interval (0, 1)");
    }
    if (n_plus < 1 || n_minus < 1) throw ConfigError("both class counts must be >= 1");
    const double total = static_cast<double>(n_plus + n_minus);
    ClassWeights cw;
    cw.theta = theta;
    cw.w_plus = theta * total / static_cast<double>(n_plus);
    cw.w_minus = (1.0 - theta) * total / static_cast<double>(n_minus);
    return cw;
}

namespace {

// Standard normal stream: mt19937_64 -> 53-bit uniforms -> Box-Muller pairs.
// Spelled out (rather than std::normal_distribution) so the same seed yields
// the same dataset on every implementation; the recipe is documented in the
// README.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_carry_) {
            have_carry_ = false;
            return carry_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();        // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        carry_ = r * std::sin(angle);
        have_carry_ = true;
        return r * std::cos(angle);
    }

private:
    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 rng_;
    double carry_ = 0.0;
    bool have_carry_ = false;
};

}  // namespace

LabeledDataset gen_gaussian(const GaussianSpec& spec) {
    const std::size_t d = spec.dim();
    if (d == 0) throw ConfigError("mu_plus must have at least one component");
    if (spec.mu_minus.size() != d) throw ConfigError("mu_minus dimension does not match mu_plus");
    if (spec.cov.size() != d * d) throw ConfigError("cov must be a d x d matrix");
    if (spec.n_per_class < 1) throw ConfigError("n_per_class must be >= 1");
    if (!(spec.prior_plus > 0.0) || !(spec.prior_plus < 1.0)) {
        throw ConfigError("prior_plus must lie in (0, 1)");
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (std::abs(spec.cov[i * d + j] - spec.cov[j * d + i]) >
                1e-12 * std::max(1.0, std::abs(spec.cov[i * d + j]))) {
                throw ConfigError("cov must be symmetric");
            }
        }
    }
    auto chol = detail::cholesky(spec.cov, d);
    if (!chol) throw ConfigError("cov must be positive definite");

    const std::size_t n = spec.n_per_class;
    std::vector<double> coords(2 * n * d);
    std::vector<int> labels(2 * n);
    NormalStream normals(spec.seed);
    std::vector<double> z(d);

    for (std::size_t i = 0; i < 2 * n; ++i) {
        const bool positive = i < n;
        const auto& mu = positive ? spec.mu_plus : spec.mu_minus;
        labels[i] = positive ? 1 : -1;
        for (std::size_t k = 0; k < d; ++k) z[k] = normals.next();
        for (std::size_t r = 0; r < d; ++r) {
            double v = mu[r];
            for (std::size_t k = 0; k <= r; ++k) v += (*chol)[r * d + k] * z[k];
            coords[i * d + r] = v;
        }
    }
    return LabeledDataset(d, std::move(coords), std::move(labels), {});
}

LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("no data rows");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_fields(line);
    bool has_weight = !header.empty() && std::string_view(header.back()) == "weight";
    if (has_weight) header.pop_back();
    if (header.empty() || std::string_view(header.back()) != "label") {
        throw ParseError("header must end with 'label' (optionally followed by 'weight')", 1);
    }
    header.pop_back();
    const std::size_t d = header.size();
    if (d == 0) throw ParseError("header has no feature columns", 1);
    for (std::size_t k = 0; k < d; ++k) {
        const std::string expected = "x" + std::to_string(k + 1);
        if (std::string_view(header[k]) != expected) {
            throw ParseError("expected column '" + expected + "', got '" + std::string(header[k]) + "'", 1);
        }
    }

    std::vector<double> coords;
    std::vector<int> labels;
    std::vector<double> weights;
    const std::size_t expected_fields = d + 1 + (has_weight ? 1 : 0);

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != expected_fields) {
            throw ParseError("expected " + std::to_string(expected_fields) + " columns, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t k = 0; k < d; ++k) {
            coords.push_back(parse_double(fields[k], line_no, "x" + std::to_string(k + 1)));
        }
        std::string_view label = fields[d];
        if (label == "+1") {
            labels.push_back(1);
        } else if (label == "-1") {
            labels.push_back(-1);
        } else {
            throw ParseError("unknown label token '" + std::string(label) + "' (expected +1 or -1)",
                             line_no);
        }
        if (has_weight) {
            double w = parse_double(fields[d + 1], line_no, "weight");
            if (!(w > 0.0)) throw ParseError("weight must be > 0", line_no);
            weights.push_back(w);
        }
    }
    if (labels.empty()) throw ParseError("no data rows");
    return LabeledDataset(d, std::move(coords), std::move(labels), std::move(weights));
}

void save_dataset(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);

    const std::size_t d = dataset.dim();
    bool uniform = std::all_of(dataset.base_weights().begin(), dataset.base_weights().end(),
                               [](double w) { return w == 1.0; });

    for (std::size_t k = 0; k < d; ++k) out << "x" << (k + 1) << ",";
    out << "label";
    if (!uniform) out << ",weight";
    out << "\n";

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto p = dataset.point(i);
        for (std::size_t k = 0; k < d; ++k) out << format_double(p[k]) << ",";
        out << (dataset.label(i) > 0 ? "+1" : "-1");
        if (!uniform) out << "," << format_double(dataset.base_weight(i));
        out << "\n";
    }
    if (!out) throw ParseError("write failed: " + path);
}

GaussianSpec load_gaussian_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open spec file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("spec file must hold a JSON object");

    GaussianSpec spec;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "mu_plus") {
                spec.mu_plus = value.get<std::vector<double>>();
            } else if (key == "mu_minus") {
                spec.mu_minus = value.get<std::vector<double>>();
            } else if (key == "cov") {
                spec.cov.clear();
                if (!value.is_array() || value.empty()) throw ConfigError("cov must be an array of rows");
                const std::size_t d = value.size();
                for (const auto& row : value) {
                    if (!row.is_array() || row.size() != d) {
                        throw ConfigError("cov must be a square nested array");
                    }
                    for (const auto& entry : row) spec.cov.push_back(entry.get<double>());
                }
            } else if (key == "n_per_class") {
                auto n = value.get<long long>();
                if (n < 1) throw ConfigError("n_per_class must be >= 1");
                spec.n_per_class = static_cast<std::size_t>(n);
            } else if (key == "prior_plus") {
                spec.prior_plus = value.get<double>();
            } else if (key == "seed") {
                spec.seed = value.get<std::uint64_t>();
            } else {
                throw ConfigError("unknown field '" + key + "' in spec file");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("field '" + key + "': " + e.what());
        }
    }
    return spec;
}

void save_gaussian_spec(const GaussianSpec& spec, const std::string& path) {
    nlohmann::json doc;
    doc["mu_plus"] = spec.mu_plus;
    doc["mu_minus"] = spec.mu_minus;
    const std::size_t d = spec.dim();
    nlohmann::json cov = nlohmann::json::array();
    for (std::size_t i = 0; i < d; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < d; ++j) row.push_back(spec.cov[i * d + j]);
        cov.push_back(row);
    }
    doc["cov"] = cov;
    doc["n_per_class"] = spec.n_per_class;
    doc["prior_plus"] = spec.prior_plus;
    doc["seed"] = spec.seed;

    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace isoprob
