#pragma once

#include <json.hpp>

#include "mbo/eval.hpp"
#include "mbo/labels.hpp"
#include "mbo/timestamp.hpp"

namespace mbo {

// Plot-ready JSON fragments shared by the pipeline report and `eval`.

inline nlohmann::json metrics_json(const EvalMetrics& m) {
    return nlohmann::json{{"accuracy", m.accuracy},
                          {"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1}};
}

inline nlohmann::json confusion_json(const Confusion& cm) {
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json norm = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        auto ru = static_cast<std::size_t>(r);
        counts.push_back({cm.counts[ru][0], cm.counts[ru][1], cm.counts[ru][2]});
        norm.push_back({cm.normalized[ru][0], cm.normalized[ru][1], cm.normalized[ru][2]});
    }
    return nlohmann::json{{"counts", counts},
                          {"row_normalized", norm},
                          {"empty_rows", {cm.empty_row[0], cm.empty_row[1], cm.empty_row[2]}}};
}

inline nlohmann::json daily_json(const DailyAccuracy& da) {
    nlohmann::json days = nlohmann::json::array();
    for (std::size_t i = 0; i < da.day.size(); ++i)
        days.push_back({{"date", Timestamp::day_index_to_date(da.day[i])},
                        {"accuracy", da.accuracy[i]}});
    return nlohmann::json{{"per_day", days},
                          {"summary",
                           {{"min", da.summary.min},
                            {"q1", da.summary.q1},
                            {"median", da.summary.median},
                            {"q3", da.summary.q3},
                            {"max", da.summary.max}}}};
}

inline nlohmann::json balance_json(const ClassProportions& p) {
    return nlohmann::json{{"down", p.down}, {"stationary", p.stationary}, {"up", p.up}};
}

}  // namespace mbo
