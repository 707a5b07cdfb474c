// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_EVALUATION_HPP
#define MDRNET_EVALUATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdrnet/error.hpp"

namespace mdrnet {

// argmax over the first num_classes logits (the adversarial logit, if any,
// is ignored). Returns a 1-based class; ties go to the lowest class.
inline int classify(std::span<const double> logits, std::size_t num_classes) {
    if (num_classes == 0 || logits.size() < num_classes) throw ShapeError("classify: too few logits");
    std::size_t best = 0;
    for (std::size_t c = 1; c < num_classes; ++c) {
        if (logits[c] > logits[best]) best = c;
    }
    return static_cast<int>(best) + 1;
}

inline double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) throw ShapeError("accuracy: length mismatch");
    if (predictions.empty()) throw ShapeError("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

enum class Metric { euclidean, cosine };

struct DescriptorRecord {
    std::string id;
    int label = 0;
    std::vector<double> values;
};

struct RetrievalResult {
    std::string query_id;
    std::vector<std::string> ranked_ids;  // ascending distance, ties by id
    std::vector<double> distances;
    std::vector<bool> relevant;  // same class as the query

    std::size_t relevant_count() const {
        return static_cast<std::size_t>(std::count(relevant.begin(), relevant.end(), true));
    }
};

inline double descriptor_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size()) {
        throw ShapeError("descriptor dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    if (metric == Metric::euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot / std::sqrt(na * nb);
}

// Ranks the gallery against the query. An entry with the query's id is skipped.
inline RetrievalResult retrieve(const DescriptorRecord& query, std::span<const DescriptorRecord> gallery,
                                Metric metric = Metric::euclidean) {
    struct Scored {
        double distance;
        const DescriptorRecord* item;
    };
    std::vector<Scored> scored;
    for (const auto& g : gallery) {
        if (g.id == query.id) continue;
        scored.push_back({descriptor_distance(query.values, g.values, metric), &g});
    }
    if (scored.empty()) throw ShapeError("retrieve: gallery has no items besides the query");
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.item->id < b.item->id;
    });
    RetrievalResult r;
    r.query_id = query.id;
    for (const auto& s : scored) {
        r.ranked_ids.push_back(s.item->id);
        r.distances.push_back(s.distance);
        r.relevant.push_back(s.item->label == query.label);
    }
    return r;
}

// Mean over relevant ranks r of precision@r; nullopt when nothing is relevant.
inline std::optional<double> average_precision(const RetrievalResult& result) {
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < result.relevant.size(); ++i) {
        if (result.relevant[i]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    if (hits == 0) return std::nullopt;
    return sum / static_cast<double>(hits);
}

struct MeanApResult {
    double map = 0.0;
    std::size_t queries = 0;
    std::size_t excluded_queries = 0;
    std::vector<RetrievalResult> results;  // one per record, in input order
};

// Leave-one-out: every record queries all the others.
inline MeanApResult mean_ap(std::span<const DescriptorRecord> records, Metric metric = Metric::euclidean) {
    MeanApResult out;
    double sum = 0.0;
    for (const auto& q : records) {
        auto r = retrieve(q, records, metric);
        if (const auto ap = average_precision(r)) {
            sum += *ap;
            ++out.queries;
        } else {
            ++out.excluded_queries;
        }
        out.results.push_back(std::move(r));
    }
    out.map = out.queries ? sum / static_cast<double>(out.queries) : 0.0;
    return out;
}

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

// One point per rank.
struct PrCurve {
    std::vector<PrPoint> points;
};

inline PrCurve pr_curve(const RetrievalResult& result) {
    const std::size_t total = result.relevant_count();
    if (total == 0) throw ShapeError("pr_curve: query " + result.query_id + " has no relevant items");
    PrCurve c;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < result.relevant.size(); ++i) {
        hits += result.relevant[i] ? 1 : 0;
        c.points.push_back({static_cast<double>(hits) / static_cast<double>(total),
                            static_cast<double>(hits) / static_cast<double>(i + 1)});
    }
    return c;
}

inline constexpr std::size_t kRecallLevels = 11;

// Interpolated precision at recall 0.0, 0.1, ..., 1.0: best precision at any recall >= level.
inline std::array<double, kRecallLevels> interpolated_precision(const PrCurve& curve) {
    std::array<double, kRecallLevels> out{};
    for (std::size_t l = 0; l < kRecallLevels; ++l) {
        const double level = static_cast<double>(l) / 10.0;
        double best = 0.0;
        for (const auto& p : curve.points) {
            if (p.recall >= level - 1e-12) best = std::max(best, p.precision);
        }
        out[l] = best;
    }
    return out;
}

inline std::array<double, kRecallLevels> macro_interpolated_precision(std::span<const PrCurve> curves) {
    std::array<double, kRecallLevels> out{};
    if (curves.empty()) return out;
    for (const auto& c : curves) {
        const auto p = interpolated_precision(c);
        for (std::size_t l = 0; l < kRecallLevels; ++l) out[l] += p[l];
    }
    for (auto& v : out) v /= static_cast<double>(curves.size());
    return out;
}

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

// Per-rank curve averaged over the given queries: "rank,recall,precision".
inline std::string emit_pr_csv(std::span<const PrCurve> curves) {
    std::string out = "rank,recall,precision\n";
    std::size_t longest = 0;
    for (const auto& c : curves) longest = std::max(longest, c.points.size());
    for (std::size_t r = 0; r < longest; ++r) {
        double recall = 0.0, precision = 0.0;
        std::size_t n = 0;
        for (const auto& c : curves) {
            if (r < c.points.size()) {
                recall += c.points[r].recall;
                precision += c.points[r].precision;
                ++n;
            }
        }
        out += std::to_string(r + 1) + "," + detail::format_real(recall / n) + "," +
               detail::format_real(precision / n) + "\n";
    }
    return out;
}

// 11-point macro-averaged interpolated curve: "recall,precision".
inline std::string emit_pr11_csv(std::span<const PrCurve> curves) {
    const auto p = macro_interpolated_precision(curves);
    std::string out = "recall,precision\n";
    for (std::size_t l = 0; l < kRecallLevels; ++l) {
        char level[8];
        std::snprintf(level, sizeof level, "%.1f", static_cast<double>(l) / 10.0);
        out += std::string(level) + "," + detail::format_real(p[l]) + "\n";
    }
    return out;
}

// "metric = value" lines.
inline std::string format_summary(std::optional<double> acc, const MeanApResult& map) {
    std::string out;
    if (acc) out += "accuracy = " + detail::format_real(*acc) + "\n";
    out += "map = " + detail::format_real(map.map) + "\n";
    out += "excluded_queries = " + std::to_string(map.excluded_queries) + "\n";
    return out;
}

} // namespace mdrnet

#endif // MDRNET_EVALUATION_HPP
