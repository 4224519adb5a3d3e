// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/config.hpp"

#include "opclt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace opclt {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string msg = "invalid configuration:";
    for (const auto& p : problems)
        msg += "\n  - " + p;
    return msg;
}

struct Reader {
    std::vector<std::string> problems;

    void fail(std::string msg) { problems.push_back(std::move(msg)); }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& path)
    {
        if (!obj.contains(key)) {
            fail(path + "." + key + ": missing");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(path + "." + key + ": expected a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(path + "." + key + ": must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<OperatorMatrix> matrix(const json& v, const std::string& path, int dim)
    {
        if (!v.is_array() || v.empty()) {
            fail(path + ": expected a non-empty array of rows");
            return std::nullopt;
        }
        const auto rows = static_cast<int>(v.size());
        if (dim > 0 && rows != dim) {
            fail(path + ": has " + std::to_string(rows) + " rows but ensemble.dim is " +
                 std::to_string(dim));
            return std::nullopt;
        }
        OperatorMatrix m(rows, rows);
        bool ok = true;
        for (int i = 0; i < rows; ++i) {
            const json& row = v[i];
            if (!row.is_array() || static_cast<int>(row.size()) != rows) {
                fail(path + "[" + std::to_string(i) + "]: expected " + std::to_string(rows) +
                     " entries (square matrix)");
                ok = false;
                continue;
            }
            for (int j = 0; j < rows; ++j) {
                if (!row[j].is_number() || !std::isfinite(row[j].get<double>())) {
                    fail(path + "[" + std::to_string(i) + "][" + std::to_string(j) +
                         "]: expected a finite number");
                    ok = false;
                    continue;
                }
                m(i, j) = row[j].get<double>();
            }
        }
        if (!ok)
            return std::nullopt;
        return m;
    }

    std::optional<Vec> vector(const json& v, const std::string& path, int dim, int basis)
    {
        if (v.is_string()) {
            if (v.get<std::string>() != "canonical") {
                fail(path + ": unknown token '" + v.get<std::string>() +
                     "' (expected \"canonical\" or an array)");
                return std::nullopt;
            }
            if (dim < 1)
                return std::nullopt;
            Vec e = Vec::Zero(dim);
            e(std::min(basis, dim - 1)) = 1.0;
            return e;
        }
        if (!v.is_array() || v.empty()) {
            fail(path + ": expected \"canonical\" or a non-empty array");
            return std::nullopt;
        }
        Vec out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
                fail(path + "[" + std::to_string(i) + "]: expected a finite number");
                return std::nullopt;
            }
            out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
        }
        if (dim > 0 && out.size() != dim) {
            fail(path + ": has dimension " + std::to_string(out.size()) +
                 " but ensemble.dim is " + std::to_string(dim));
            return std::nullopt;
        }
        return out;
    }
};

std::optional<Ensemble> read_ensemble(Reader& r, const json& spec, int& dim)
{
    if (!spec.is_object()) {
        r.fail("ensemble: missing or not an object");
        return std::nullopt;
    }
    dim = 0;
    if (!spec.contains("dim") || !spec.at("dim").is_number_integer() ||
        spec.at("dim").get<long long>() < 1)
        r.fail("ensemble.dim: expected an integer >= 1");
    else
        dim = static_cast<int>(spec.at("dim").get<long long>());

    if (!spec.contains("family") || !spec.at("family").is_string()) {
        r.fail("ensemble.family: expected one of two_point, finite_support, diagonal_uniform, "
               "deterministic");
        return std::nullopt;
    }
    Family family;
    try {
        family = family_from_string(spec.at("family").get<std::string>());
    } catch (const std::invalid_argument& err) {
        r.fail(std::string("ensemble.family: ") + err.what());
        return std::nullopt;
    }

    const std::size_t before = r.problems.size();
    auto get_matrix = [&](const std::string& key) -> std::optional<OperatorMatrix> {
        if (!spec.contains(key)) {
            r.fail("ensemble." + key + ": missing");
            return std::nullopt;
        }
        return r.matrix(spec.at(key), "ensemble." + key, dim);
    };

    try {
        switch (family) {
        case Family::two_point: {
            auto a0 = get_matrix("a0");
            auto a1 = get_matrix("a1");
            auto p = r.number(spec, "p", "ensemble");
            if (p && (*p < 0.0 || *p > 1.0))
                r.fail("ensemble.p: must lie in [0, 1]");
            if (r.problems.size() == before)
                return Ensemble::two_point(*a0, *a1, *p);
            break;
        }
        case Family::finite_support: {
            std::vector<OperatorMatrix> support;
            std::vector<double> probs;
            if (!spec.contains("support") || !spec.at("support").is_array() ||
                spec.at("support").empty()) {
                r.fail("ensemble.support: expected a non-empty list of matrices");
            } else {
                const json& s = spec.at("support");
                for (std::size_t i = 0; i < s.size(); ++i)
                    if (auto m = r.matrix(s[i], "ensemble.support[" + std::to_string(i) + "]", dim))
                        support.push_back(*m);
            }
            if (!spec.contains("probabilities") || !spec.at("probabilities").is_array()) {
                r.fail("ensemble.probabilities: expected an array of numbers");
            } else {
                for (const auto& p : spec.at("probabilities")) {
                    if (!p.is_number() || p.get<double>() < 0.0 || p.get<double>() > 1.0)
                        r.fail("ensemble.probabilities: entries must be numbers in [0, 1]");
                    else
                        probs.push_back(p.get<double>());
                }
                if (spec.contains("support") && spec.at("support").is_array() &&
                    spec.at("probabilities").size() != spec.at("support").size())
                    r.fail("ensemble.probabilities: count differs from ensemble.support");
            }
            if (r.problems.size() == before)
                return Ensemble::finite_support(support, probs);
            break;
        }
        case Family::diagonal_uniform: {
            auto lo = r.number(spec, "lo", "ensemble");
            auto hi = r.number(spec, "hi", "ensemble");
            if (lo && hi && *lo > *hi)
                r.fail("ensemble.lo/ensemble.hi: need lo <= hi");
            if (r.problems.size() == before)
                return Ensemble::diagonal_uniform(dim, *lo, *hi);
            break;
        }
        case Family::deterministic: {
            auto m = get_matrix("matrix");
            if (r.problems.size() == before)
                return Ensemble::deterministic(*m);
            break;
        }
        }
    } catch (const std::invalid_argument& err) {
        r.fail(std::string("ensemble: ") + err.what());
    }
    return std::nullopt;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems))
{
}

bool ExperimentConfig::runs(const std::string& suite) const
{
    return std::find(suites.begin(), suites.end(), suite) != suites.end();
}

json ExperimentConfig::semantic_json() const
{
    json probes_json = json::array();
    for (const auto& p : probes)
        probes_json.push_back({{"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())},
                               {"y", std::vector<double>(p.y.data(), p.y.data() + p.y.size())}});
    std::vector<std::string> sorted_suites = suites;
    std::sort(sorted_suites.begin(), sorted_suites.end());
    return {
        {"ensemble", ensemble_spec},
        {"probes", probes_json},
        {"n_grid", n_grid},
        {"replicates", replicates},
        {"master_seed", master_seed},
        {"suites", sorted_suites},
        {"options",
         {{"clt_variance_tolerance", clt_variance_tolerance},
          {"doob_k_max", doob_k_max},
          {"martingale_mean_draws", martingale_mean_draws},
          {"lindeberg_epsilon", lindeberg_epsilon}}},
    };
}

std::string ExperimentConfig::digest() const
{
    const std::string text = semantic_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> parse_suite_list(const std::string& csv)
{
    std::vector<std::string> out;
    std::vector<std::string> problems;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        if (std::find(kSuiteNames.begin(), kSuiteNames.end(), item) == kSuiteNames.end())
            problems.push_back("suites: unknown suite '" + item + "'");
        else if (std::find(out.begin(), out.end(), item) == out.end())
            out.push_back(item);
    }
    if (!problems.empty())
        throw ConfigError(problems);
    return out;
}

ExperimentConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& err) {
        // Translate the byte offset into line/column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < err.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError({"parse error at line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + err.what()});
    }
    if (!doc.is_object())
        throw ConfigError({"top level: expected an object"});

    Reader r;
    ExperimentConfig cfg;
    int dim = 0;
    if (doc.contains("ensemble")) {
        cfg.ensemble_spec = doc.at("ensemble");
        cfg.ensemble = read_ensemble(r, cfg.ensemble_spec, dim);
    } else {
        r.fail("ensemble: missing");
    }

    // Probes.
    auto read_pair = [&](const json& p, const std::string& path) {
        if (!p.is_object()) {
            r.fail(path + ": expected an object with x and y");
            return;
        }
        const json canonical = "canonical";
        auto x = r.vector(p.contains("x") ? p.at("x") : canonical, path + ".x", dim, 0);
        auto y = r.vector(p.contains("y") ? p.at("y") : canonical, path + ".y", dim, 1);
        if (x && y)
            cfg.probes.push_back({*x, *y});
    };
    const json probes = doc.contains("probes") ? doc.at("probes") : json("canonical");
    if (probes.is_string()) {
        read_pair(json{{"x", probes}, {"y", probes}}, "probes");
    } else if (probes.is_array()) {
        if (probes.empty())
            r.fail("probes: list is empty");
        for (std::size_t i = 0; i < probes.size(); ++i)
            read_pair(probes[i], "probes[" + std::to_string(i) + "]");
    } else {
        read_pair(probes, "probes");
    }

    // Grid.
    if (!doc.contains("n_grid") || !doc.at("n_grid").is_array() || doc.at("n_grid").empty()) {
        r.fail("n_grid: expected a non-empty array of integers");
    } else {
        const json& g = doc.at("n_grid");
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number_integer() || g[i].get<long long>() < 1 ||
                g[i].get<long long>() > 1'000'000) {
                r.fail("n_grid[" + std::to_string(i) + "]: expected an integer in [1, 1000000]");
                continue;
            }
            const int n = static_cast<int>(g[i].get<long long>());
            if (!cfg.n_grid.empty() && n <= cfg.n_grid.back())
                r.fail("n_grid[" + std::to_string(i) + "]: grid must be strictly increasing (" +
                       std::to_string(n) + " after " + std::to_string(cfg.n_grid.back()) + ")");
            cfg.n_grid.push_back(n);
        }
    }

    if (!doc.contains("replicates") || !doc.at("replicates").is_number_integer() ||
        doc.at("replicates").get<long long>() < 1)
        r.fail("replicates: expected an integer >= 1");
    else
        cfg.replicates = static_cast<int>(doc.at("replicates").get<long long>());

    if (doc.contains("master_seed")) {
        const json& s = doc.at("master_seed");
        if (s.is_number_unsigned())
            cfg.master_seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0)
            cfg.master_seed = static_cast<std::uint64_t>(s.get<long long>());
        else
            r.fail("master_seed: expected a non-negative 64-bit integer");
    }

    if (doc.contains("suites")) {
        const json& s = doc.at("suites");
        if (!s.is_array()) {
            r.fail("suites: expected an array of suite names");
        } else {
            for (const auto& name : s) {
                if (!name.is_string() || std::find(kSuiteNames.begin(), kSuiteNames.end(),
                                                   name.get<std::string>()) == kSuiteNames.end())
                    r.fail("suites: unknown suite " + name.dump());
                else if (!cfg.runs(name.get<std::string>()))
                    cfg.suites.push_back(name.get<std::string>());
            }
        }
    } else {
        cfg.suites = kSuiteNames;
    }

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string())
            r.fail("output_dir: expected a string");
        else
            cfg.output_dir = doc.at("output_dir").get<std::string>();
    }

    if (doc.contains("options")) {
        const json& o = doc.at("options");
        if (!o.is_object()) {
            r.fail("options: expected an object");
        } else {
            for (const auto& [key, value] : o.items()) {
                if (key == "clt_variance_tolerance") {
                    if (!value.is_number() || value.get<double>() <= 0.0)
                        r.fail("options.clt_variance_tolerance: expected a positive number");
                    else
                        cfg.clt_variance_tolerance = value.get<double>();
                } else if (key == "doob_k_max") {
                    if (!value.is_number_integer() || value.get<long long>() < 1 ||
                        value.get<long long>() > kMaxDoobSteps)
                        r.fail("options.doob_k_max: expected an integer in [1, 12]");
                    else
                        cfg.doob_k_max = static_cast<int>(value.get<long long>());
                } else if (key == "martingale_mean_draws") {
                    if (!value.is_number_integer() || value.get<long long>() < 2)
                        r.fail("options.martingale_mean_draws: expected an integer >= 2");
                    else
                        cfg.martingale_mean_draws = static_cast<long>(value.get<long long>());
                } else if (key == "lindeberg_epsilon") {
                    if (!value.is_number() || value.get<double>() <= 0.0)
                        r.fail("options.lindeberg_epsilon: expected a positive number");
                    else
                        cfg.lindeberg_epsilon = value.get<double>();
                } else {
                    r.fail("options." + key + ": unknown option");
                }
            }
        }
    }

    if (!r.problems.empty())
        throw ConfigError(r.problems);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError({"cannot open config file " + path.string()});
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace opclt
