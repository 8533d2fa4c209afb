#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpme/matrix.hpp"
#include "bpme/model.hpp"
#include "bpme/simulate.hpp"
#include "bpme/validate.hpp"

namespace bpme {

using json = nlohmann::json;

/// File could not be read or is not valid JSON.
struct ParseError : Error {
    using Error::Error;
};

/// FNV-1a 64-bit hash, used to fingerprint model files in reports.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses a model document:
///   { "states": ["a", ...],
///     "transitions": [[...], ...],
///     "offspring": { "a": [[count, probability], ...], ... } }
/// Structural problems are collected and reported together with row/state
/// context. Offspring probabilities must already sum to 1: pre-truncated
/// distributions with unnormalized tails are rejected, not renormalized.
inline BpmeModel parse_model_json(const json& doc) {
    std::vector<std::string> issues;
    if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "states" && key != "transitions" && key != "offspring" && key != "name")
            issues.push_back("unknown field \"" + key + "\"");
    }

    std::vector<std::string> labels;
    if (!doc.contains("states") || !doc["states"].is_array() || doc["states"].empty()) {
        issues.push_back("\"states\" must be a nonempty array of strings");
    } else {
        for (const auto& s : doc["states"]) {
            if (!s.is_string()) {
                issues.push_back("\"states\" entries must be strings");
                break;
            }
            labels.push_back(s.get<std::string>());
        }
        for (std::size_t a = 0; a < labels.size(); ++a)
            for (std::size_t b = a + 1; b < labels.size(); ++b)
                if (labels[a] == labels[b])
                    issues.push_back("duplicate state label \"" + labels[a] + "\"");
    }
    const int n = static_cast<int>(labels.size());

    Matrix P;
    if (!doc.contains("transitions") || !doc["transitions"].is_array() ||
        static_cast<int>(doc["transitions"].size()) != n) {
        issues.push_back("\"transitions\" must be an array of " + std::to_string(n) + " rows");
    } else if (n > 0) {
        P = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            const auto& row = doc["transitions"][static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != n) {
                issues.push_back("transitions row " + std::to_string(i) + " (" + labels[i] +
                                 ") must have " + std::to_string(n) + " entries");
                continue;
            }
            double rs = 0.0;
            bool ok = true;
            for (int j = 0; j < n; ++j) {
                if (!row[static_cast<std::size_t>(j)].is_number()) {
                    issues.push_back("transitions row " + std::to_string(i) + " (" + labels[i] +
                                     "): entry " + std::to_string(j) + " is not a number");
                    ok = false;
                    break;
                }
                P(i, j) = row[static_cast<std::size_t>(j)].get<double>();
                if (P(i, j) < 0.0 || P(i, j) > 1.0 + kEntryTol) {
                    issues.push_back("transitions row " + std::to_string(i) + " (" + labels[i] +
                                     "): entry " + std::to_string(j) + " outside [0,1]");
                    ok = false;
                }
                rs += P(i, j);
            }
            if (ok && std::abs(rs - 1.0) > kEntryTol)
                issues.push_back("transitions row " + std::to_string(i) + " (" + labels[i] +
                                 ") sums to " + std::to_string(rs) + ", expected 1");
        }
    }

    std::vector<std::vector<std::pair<int, double>>> pmfs(static_cast<std::size_t>(n));
    if (!doc.contains("offspring") || !doc["offspring"].is_object()) {
        issues.push_back("\"offspring\" must be an object keyed by state label");
    } else {
        const auto& off = doc["offspring"];
        for (const auto& [key, value] : off.items()) {
            (void)value;
            bool known = false;
            for (const auto& l : labels) known = known || (l == key);
            if (!known) issues.push_back("offspring for unknown state \"" + key + "\"");
        }
        for (int i = 0; i < n; ++i) {
            const std::string& label = labels[static_cast<std::size_t>(i)];
            if (!off.contains(label)) {
                issues.push_back("offspring missing for state \"" + label + "\"");
                continue;
            }
            const auto& pairs = off[label];
            if (!pairs.is_array() || pairs.empty()) {
                issues.push_back("offspring[\"" + label +
                                 "\"] must be a nonempty array of [count, probability]");
                continue;
            }
            double total = 0.0;
            bool ok = true;
            std::vector<int> seen;
            for (const auto& pair : pairs) {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
                    !pair[1].is_number()) {
                    issues.push_back("offspring[\"" + label +
                                     "\"]: entries must be [integer count, probability]");
                    ok = false;
                    break;
                }
                const int count = pair[0].get<int>();
                const double prob = pair[1].get<double>();
                if (count < 0) {
                    issues.push_back("offspring[\"" + label + "\"]: negative count " +
                                     std::to_string(count));
                    ok = false;
                }
                if (prob < 0.0 || prob > 1.0 + kEntryTol) {
                    issues.push_back("offspring[\"" + label + "\"]: probability " +
                                     std::to_string(prob) + " outside [0,1]");
                    ok = false;
                }
                for (int c : seen)
                    if (c == count) {
                        issues.push_back("offspring[\"" + label + "\"]: duplicate count " +
                                         std::to_string(count));
                        ok = false;
                    }
                seen.push_back(count);
                total += prob;
                pmfs[static_cast<std::size_t>(i)].push_back({count, prob});
            }
            if (ok && std::abs(total - 1.0) > kEntryTol)
                issues.push_back("offspring[\"" + label + "\"]: probabilities sum to " +
                                 std::to_string(total) + ", expected 1 (unnormalized tail?)");
        }
    }

    if (!issues.empty()) {
        std::string msg = "invalid model document:";
        for (const auto& s : issues) msg += "\n  - " + s;
        throw ValidationError(msg);
    }

    std::vector<OffspringDist> offspring;
    offspring.reserve(static_cast<std::size_t>(n));
    for (const auto& pmf : pmfs) offspring.push_back(offspring_from_pmf(pmf));
    return build_model(validate_chain(P, labels), std::move(offspring));
}

struct LoadedModel {
    BpmeModel model;
    std::uint64_t file_hash = 0;
    std::string path;
};

inline LoadedModel load_model_file(const std::string& path) {
    const std::string bytes = read_file(path);
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError("cannot parse " + path + ": " + e.what());
    }
    return LoadedModel{parse_model_json(doc), fnv1a64(bytes), path};
}

inline json matrix_to_json(const std::vector<std::string>& labels, const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"labels", labels}, {"rows", std::move(rows)}};
}

inline std::string matrix_to_csv(const std::vector<std::string>& labels, const Matrix& m) {
    std::ostringstream out;
    out << "state";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
        out << '\n';
    }
    return out.str();
}

/// CSV dump of one trajectory: header t,state,offspring,population.
/// Row t=0 carries the initial condition with offspring 0.
inline std::string trajectory_to_csv(const std::vector<std::string>& labels,
                                     const Trajectory& traj) {
    std::ostringstream out;
    out << "t,state,offspring,population\n";
    out << "0," << labels[static_cast<std::size_t>(traj.init.state)] << ",0,"
        << traj.init.population << '\n';
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
        const auto& s = traj.steps[k];
        out << (k + 1) << ',' << labels[static_cast<std::size_t>(s.state_after)] << ','
            << s.offspring << ',' << s.population_after << '\n';
    }
    return out.str();
}

inline json check_report_to_json(const CheckReport& r) {
    return json{{"name", r.name},       {"statistic", r.statistic}, {"target", r.target},
                {"tolerance", r.tolerance}, {"n_samples", r.n_samples}, {"passed", r.passed},
                {"seed", r.seed},       {"notes", r.notes}};
}

}  // namespace bpme
