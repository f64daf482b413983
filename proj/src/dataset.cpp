#include "mbo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mbo/errors.hpp"
#include "mbo/timestamp.hpp"

namespace mbo {

using nlohmann::json;

void write_tick_series(const TickSeries& series, const std::string& path) {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw IoError("cannot write " + path);
    std::uint32_t width = static_cast<std::uint32_t>(series.feature_width);
    for (std::size_t i = 0; i < series.size(); ++i) {
        bin.write(reinterpret_cast<const char*>(&width), sizeof width);
        bin.write(reinterpret_cast<const char*>(series.row(i)),
                  static_cast<std::streamsize>(sizeof(double) * width));
    }

    json side;
    side["schema_version"] = 1;
    side["mode"] = series.mode;
    side["instrument"] = series.instrument;
    side["tick_size"] = series.tick_size.to_string();
    side["feature_width"] = series.feature_width;
    side["lookback"] = series.lookback;
    side["n_rows"] = series.size();
    side["day_index"] = series.day_index;
    side["mid"] = series.mid;
    json dates = json::array();
    {
        std::set<std::int32_t> distinct(series.day_index.begin(), series.day_index.end());
        for (std::int32_t d : distinct) dates.push_back(Timestamp::day_index_to_date(d));
    }
    side["dates"] = dates;

    std::ofstream js(path + ".json");
    if (!js) throw IoError("cannot write " + path + ".json");
    js << side.dump() << '\n';
}

TickSeries read_tick_series(const std::string& path) {
    std::ifstream js(path + ".json");
    if (!js) throw IoError("cannot open sidecar " + path + ".json");
    json side = json::parse(js);

    TickSeries series;
    series.mode = side.at("mode").get<std::string>();
    series.instrument = side.at("instrument").get<std::string>();
    if (!Decimal::parse(side.at("tick_size").get<std::string>(), series.tick_size))
        throw ParseError("bad tick_size in sidecar");
    series.feature_width = side.at("feature_width").get<int>();
    series.lookback = side.at("lookback").get<int>();
    series.day_index = side.at("day_index").get<std::vector<std::int32_t>>();
    series.mid = side.at("mid").get<std::vector<double>>();

    std::size_t n = side.at("n_rows").get<std::size_t>();
    if (series.day_index.size() != n || series.mid.size() != n)
        throw DataError("sidecar arrays disagree with n_rows in " + path);

    std::ifstream bin(path, std::ios::binary);
    if (!bin) throw IoError("cannot open " + path);
    series.rows.resize(n * static_cast<std::size_t>(series.feature_width));
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t width = 0;
        bin.read(reinterpret_cast<char*>(&width), sizeof width);
        if (!bin || width != static_cast<std::uint32_t>(series.feature_width))
            throw DataError("row " + std::to_string(i) + " width mismatch in " + path);
        bin.read(reinterpret_cast<char*>(series.rows.data() +
                                         i * static_cast<std::size_t>(series.feature_width)),
                 static_cast<std::streamsize>(sizeof(double) * width));
        if (!bin) throw DataError("truncated row data in " + path);
    }
    return series;
}

void write_mids_csv(const TickSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "tick_index,date,mid_price\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g", series.mid[i]);
        out << i << ',' << Timestamp::day_index_to_date(series.day_index[i]) << ',' << buf << '\n';
    }
}

MidsFile read_mids_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("tick_index,date,mid_price", 0) != 0)
        throw ParseError(path + ": expected mids header");
    MidsFile mids;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        auto fields = split_csv(line);
        if (fields.size() != 3) throw ParseError(path + " row " + std::to_string(row));
        mids.tick_index.push_back(std::stoull(std::string(fields[0])));
        Timestamp ts;
        if (!Timestamp::parse(std::string(fields[1]) + " 00:00:00.000000000", ts))
            throw ParseError(path + " row " + std::to_string(row) + ": bad date");
        mids.day_index.push_back(ts.day_index());
        mids.mid.push_back(std::stod(std::string(fields[2])));
    }
    return mids;
}

void write_labels_csv(const std::vector<LabeledTick>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "tick_index,l_value,class\n";
    char buf[64];
    for (const LabeledTick& lt : labels) {
        std::snprintf(buf, sizeof buf, "%.17g", lt.l_value);
        out << lt.tick_index << ',' << buf << ',' << static_cast<int>(lt.label) << '\n';
    }
}

std::vector<LabeledTick> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("tick_index,l_value,class", 0) != 0)
        throw ParseError(path + ": expected labels header");
    std::vector<LabeledTick> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        auto fields = split_csv(line);
        if (fields.size() != 3) throw ParseError(path + " row " + std::to_string(row));
        LabeledTick lt;
        lt.tick_index = std::stoull(std::string(fields[0]));
        lt.l_value = std::stod(std::string(fields[1]));
        int cls = std::stoi(std::string(fields[2]));
        if (cls < 0 || cls > 2) throw ParseError(path + " row " + std::to_string(row) + ": class");
        lt.label = static_cast<LabelClass>(cls);
        labels.push_back(lt);
    }
    return labels;
}

SampleSet make_samples(const TickSeries& series, const std::vector<LabeledTick>& labels,
                       int lookback) {
    SampleSet set;
    set.series = &series;
    set.lookback = lookback;
    std::vector<std::size_t> ends = window_end_indices(series.day_index, lookback);
    std::vector<bool> window_ok(series.size(), false);
    for (std::size_t e : ends) window_ok[e] = true;
    for (const LabeledTick& lt : labels) {
        if (lt.tick_index >= series.size())
            throw DataError("label tick index out of range: " + std::to_string(lt.tick_index));
        if (!window_ok[lt.tick_index]) continue;
        set.end_tick.push_back(lt.tick_index);
        set.label.push_back(static_cast<int>(lt.label));
    }
    return set;
}

DaySplit day_split(const std::vector<std::int32_t>& day_index, SplitFractions fractions) {
    if (fractions.train <= 0.0 || fractions.val < 0.0 || fractions.train + fractions.val >= 1.0)
        throw ConfigError("split fractions must satisfy 0 < train, 0 <= val, train+val < 1");
    std::set<std::int32_t> distinct(day_index.begin(), day_index.end());
    if (distinct.size() < 3) throw DataError("need at least 3 trading days to split");
    std::vector<std::int32_t> days(distinct.begin(), distinct.end());
    std::size_t n = days.size();
    std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       std::floor(fractions.train * n + 0.5)));
    std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(fractions.val * n + 0.5)));
    if (n_train + n_val >= n) {
        n_train = n - 2;
        n_val = 1;
    }
    DaySplit split;
    split.last_train_day = days[n_train - 1];
    split.last_val_day = days[n_train + n_val - 1];
    return split;
}

Splits split_by_day(const SampleSet& all, SplitFractions fractions) {
    DaySplit ds = day_split(all.series->day_index, fractions);
    Splits out;
    for (SampleSet* s : {&out.train, &out.val, &out.test}) {
        s->series = all.series;
        s->lookback = all.lookback;
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        int which = ds.which(all.day(i));
        SampleSet& target = which == 0 ? out.train : (which == 1 ? out.val : out.test);
        target.end_tick.push_back(all.end_tick[i]);
        target.label.push_back(all.label[i]);
    }
    return out;
}

}  // namespace mbo
