#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fbnll/clustering.hpp"
#include "fbnll/correction.hpp"
#include "fbnll/dataset_io.hpp"
#include "fbnll/metrics.hpp"
#include "fbnll/noise.hpp"
#include "fbnll/similarity.hpp"

namespace fbnll {

using json = nlohmann::json;

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace detail

inline json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
    return m;
}

inline json int_matrix_to_json(const Eigen::MatrixXi& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXi int_matrix_from_json(const json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    Eigen::MatrixXi m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<int>();
    return m;
}

// --- similarity ------------------------------------------------------------

inline json similarity_to_json(const SimilarityMatrix& sim) {
    json j;
    j["matrix"] = matrix_to_json(sim.R);
    j["pair_rank"] = int_matrix_to_json(sim.pair_rank);
    j["user_rank"] = sim.user_rank;
    j["feature_dim"] = sim.feature_dim;
    int max_rank = 0;
    for (Eigen::Index a = 0; a < sim.pair_rank.rows(); ++a)
        for (Eigen::Index b = 0; b < sim.pair_rank.cols(); ++b)
            max_rank = std::max(max_rank, sim.pair_rank(a, b));
    std::size_t total = 0;
    for (Eigen::Index a = 0; a < sim.pair_rank.rows(); ++a)
        for (Eigen::Index b = a + 1; b < sim.pair_rank.cols(); ++b)
            total += 2 * eigenvector_payload_bytes(sim.feature_dim, sim.pair_rank(a, b));
    j["payload"] = {{"bytes_per_pair", eigenvector_payload_bytes(sim.feature_dim, max_rank)},
                    {"bytes_total", total}};
    return j;
}

inline SimilarityMatrix similarity_from_json(const json& j) {
    SimilarityMatrix sim;
    sim.R = matrix_from_json(j.at("matrix"));
    sim.pair_rank = int_matrix_from_json(j.at("pair_rank"));
    sim.user_rank = j.at("user_rank").get<std::vector<int>>();
    sim.feature_dim = j.at("feature_dim").get<Eigen::Index>();
    return sim;
}

inline std::string similarity_to_csv(const Eigen::MatrixXd& R) {
    std::string out = "user";
    for (Eigen::Index j = 0; j < R.cols(); ++j) out += "," + std::to_string(j);
    out += "\n";
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        out += std::to_string(i);
        for (Eigen::Index j = 0; j < R.cols(); ++j)
            out += "," + detail::format_double(R(i, j));
        out += "\n";
    }
    return out;
}

// --- clustering ------------------------------------------------------------

inline json assignment_to_json(const ClusterAssignment& assignment) {
    json j;
    j["ci"] = int_matrix_to_json(assignment.ci);
    json trace = json::array();
    for (const auto& step : assignment.merge_trace)
        trace.push_back({{"a", step.a}, {"b", step.b}, {"height", step.height}});
    j["merge_trace"] = std::move(trace);
    return j;
}

inline ClusterAssignment assignment_from_json(const json& j) {
    ClusterAssignment assignment;
    assignment.ci = int_matrix_from_json(j.at("ci"));
    for (const auto& step : j.at("merge_trace"))
        assignment.merge_trace.push_back({step.at("a").get<int>(), step.at("b").get<int>(),
                                          step.at("height").get<double>()});
    return assignment;
}

inline std::string assignment_to_csv(const Eigen::MatrixXi& ci) {
    std::string out = "user";
    for (Eigen::Index m = 0; m < ci.cols(); ++m) out += ",cluster_" + std::to_string(m);
    out += "\n";
    for (Eigen::Index k = 0; k < ci.rows(); ++k) {
        out += std::to_string(k);
        for (Eigen::Index m = 0; m < ci.cols(); ++m) out += "," + std::to_string(ci(k, m));
        out += "\n";
    }
    return out;
}

// --- noise -----------------------------------------------------------------

inline json noise_report_to_json(const NoiseReport& report) {
    json users = json::array();
    for (std::size_t k = 0; k < report.users.size(); ++k) {
        const auto& u = report.users[k];
        users.push_back({{"user", k},
                         {"noisy", u.noisy},
                         {"alpha", u.alpha},
                         {"target_label", u.target_label},
                         {"corrupted_ids", u.corrupted_ids}});
    }
    return json{{"kind", to_string(report.kind)}, {"users", std::move(users)}};
}

// --- correction ------------------------------------------------------------

inline json correction_report_to_json(const CorrectionReport& report) {
    json users = json::array();
    std::size_t class_relabels = 0, confirmed = 0, sample_wise = 0, changed = 0;
    for (std::size_t k = 0; k < report.users.size(); ++k) {
        json classes = json::array();
        for (const auto& c : report.users[k].classes) {
            json scores = json::array();
            for (Eigen::Index i = 0; i < c.scores.size(); ++i) scores.push_back(c.scores[i]);
            json changes = json::array();
            for (const auto& ch : c.changes)
                changes.push_back({{"id", ch.sample_id}, {"from", ch.from}, {"to", ch.to}});
            classes.push_back({{"observed_class", c.observed_class},
                               {"count", c.count},
                               {"phase", c.phase},
                               {"scores", std::move(scores)},
                               {"relabel_to", c.relabel_to},
                               {"changes", std::move(changes)},
                               {"ambiguous_ids", c.ambiguous_ids}});
            if (c.phase == "class-relabel") ++class_relabels;
            if (c.phase == "confirmed-clean") ++confirmed;
            if (c.phase == "sample-wise") ++sample_wise;
            changed += c.changes.size();
        }
        users.push_back({{"user", k}, {"classes", std::move(classes)}});
    }
    return json{{"users", std::move(users)},
                {"summary",
                 {{"class_relabels", class_relabels},
                  {"confirmed_clean", confirmed},
                  {"sample_wise_classes", sample_wise},
                  {"changed_samples", changed}}}};
}

// --- partition stage artifacts ----------------------------------------------

struct PartitionArtifacts {
    UserPartition train;
    UserPartition test;
    LabeledDataset server_clean;
};

inline void save_partition(const std::string& dir, const PartitionArtifacts& arts) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "users");
    fs::create_directories(fs::path(dir) / "test");
    json meta;
    meta["users"] = arts.train.num_users();
    meta["intended_task"] = arts.train.intended_task;
    save_stage_dataset((fs::path(dir) / "server_clean.fbds").string(), arts.server_clean);
    for (int k = 0; k < arts.train.num_users(); ++k) {
        const std::string name = "user_" + std::to_string(k) + ".fbds";
        save_stage_dataset((fs::path(dir) / "users" / name).string(),
                           arts.train.users[static_cast<std::size_t>(k)]);
        save_stage_dataset((fs::path(dir) / "test" / name).string(),
                           arts.test.users[static_cast<std::size_t>(k)]);
    }
    detail::write_text((fs::path(dir) / "partition.json").string(), meta.dump(2) + "\n");
}

inline PartitionArtifacts load_partition(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "partition.json");
    if (!in) throw IoError("cannot open " + dir + "/partition.json");
    json meta = json::parse(in);
    PartitionArtifacts arts;
    arts.train.intended_task = meta.at("intended_task").get<std::vector<int>>();
    arts.test.intended_task = arts.train.intended_task;
    arts.server_clean = load_stage_dataset((fs::path(dir) / "server_clean.fbds").string());
    const int users = meta.at("users").get<int>();
    for (int k = 0; k < users; ++k) {
        const std::string name = "user_" + std::to_string(k) + ".fbds";
        arts.train.users.push_back(
            load_stage_dataset((fs::path(dir) / "users" / name).string()));
        arts.test.users.push_back(load_stage_dataset((fs::path(dir) / "test" / name).string()));
    }
    return arts;
}

// --- training log ------------------------------------------------------------

struct TrainingLogRow {
    int round = 0;
    std::vector<double> cluster_loss;
    std::vector<double> user_accuracy;
    int churn = 0;
};

inline std::string training_log_to_csv(const std::vector<TrainingLogRow>& rows) {
    if (rows.empty()) return "round,churn\n";
    std::string out = "round";
    for (std::size_t m = 0; m < rows[0].cluster_loss.size(); ++m)
        out += ",cluster_" + std::to_string(m) + "_loss";
    for (std::size_t k = 0; k < rows[0].user_accuracy.size(); ++k)
        out += ",user_" + std::to_string(k) + "_accuracy";
    out += ",churn\n";
    for (const auto& row : rows) {
        out += std::to_string(row.round);
        for (double v : row.cluster_loss) out += "," + detail::format_double(v);
        for (double v : row.user_accuracy) out += "," + detail::format_double(v);
        out += "," + std::to_string(row.churn) + "\n";
    }
    return out;
}

}  // namespace fbnll
