#include "mbo/feed_io.hpp"

#include <charconv>

#include "mbo/errors.hpp"

namespace mbo {

const char kFeedHeader[] = "timestamp,id,type,side,action,price,size";

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.emplace_back(line.data() + start, i - start);
            start = i + 1;
        }
    }
    return fields;
}

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::uint64_t parse_u64_field(std::string_view sv, const char* what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc{} || ptr != sv.data() + sv.size() || sv.empty())
        throw ParseError(std::string("non-numeric ") + what + ": '" + std::string(sv) + "'");
    return v;
}

Decimal parse_decimal_field(std::string_view sv, const char* what) {
    Decimal d;
    if (!Decimal::parse(sv, d))
        throw ParseError(std::string("malformed ") + what + ": '" + std::string(sv) + "'");
    return d;
}

}  // namespace

std::string message_violation(const MboMessage& msg) {
    if (msg.action == Action::kCancel) {
        if (msg.side || msg.price || msg.size) return "cancel carries side/price/size";
        return {};
    }
    if (!msg.side) return "add/update without side";
    if (!msg.price) return "add/update without price";
    if (!msg.size) return "add/update without size";
    if (msg.price->raw() <= 0) return "non-positive price";
    if (msg.action == Action::kAdd && msg.size->raw() <= 0) return "add with non-positive size";
    if (msg.size->raw() < 0) return "negative size";
    return {};
}

MboMessage parse_mbo_line(std::string_view line) {
    line = strip_cr(line);
    auto fields = split_csv(line);
    if (fields.size() != 7)
        throw ParseError("expected 7 fields, got " + std::to_string(fields.size()));

    MboMessage msg;
    if (!Timestamp::parse(fields[0], msg.timestamp))
        throw ParseError("malformed timestamp: '" + std::string(fields[0]) + "'");
    msg.order_id = parse_u64_field(fields[1], "id");

    std::uint64_t type_code = parse_u64_field(fields[2], "type");
    if (type_code != 1 && type_code != 2)
        throw ParseError("unknown type code: " + std::to_string(type_code));
    msg.order_type = static_cast<OrderType>(type_code);

    if (!fields[3].empty()) {
        std::uint64_t side_code = parse_u64_field(fields[3], "side");
        if (side_code != 1 && side_code != 2)
            throw ParseError("unknown side code: " + std::to_string(side_code));
        msg.side = static_cast<Side>(side_code);
    }

    std::uint64_t action_code = parse_u64_field(fields[4], "action");
    if (action_code > 2) throw ParseError("unknown action code: " + std::to_string(action_code));
    msg.action = static_cast<Action>(action_code);

    if (!fields[5].empty()) msg.price = parse_decimal_field(fields[5], "price");
    if (!fields[6].empty()) msg.size = parse_decimal_field(fields[6], "size");

    if (auto why = message_violation(msg); !why.empty()) throw ParseError(why);
    return msg;
}

std::string serialize_mbo(const MboMessage& msg) {
    std::string s = msg.timestamp.to_string();
    s += ',';
    s += std::to_string(msg.order_id);
    s += ',';
    s += std::to_string(static_cast<int>(msg.order_type));
    s += ',';
    if (msg.side) s += std::to_string(static_cast<int>(*msg.side));
    s += ',';
    s += std::to_string(static_cast<int>(msg.action));
    s += ',';
    if (msg.price) s += msg.price->to_string(0);
    s += ',';
    if (msg.size) s += msg.size->to_string(1);
    return s;
}

FeedReader::FeedReader(const std::string& path) : path_(path) {
    in_.open(path);
    if (!in_) throw IoError("cannot open feed file: " + path);
    std::string header;
    if (!std::getline(in_, header)) throw ParseError(path + ": empty file, missing header");
    if (std::string(strip_cr(header)) != kFeedHeader)
        throw ParseError(path + ": unexpected header '" + header + "'");
}

bool FeedReader::next(MboMessage& out) {
    std::string line;
    while (std::getline(in_, line)) {
        if (strip_cr(line).empty()) continue;
        ++rows_read_;
        try {
            out = parse_mbo_line(line);
        } catch (const ParseError& e) {
            throw ParseError(path_ + " row " + std::to_string(rows_read_) + ": " + e.what());
        }
        if (have_prev_ts_ && out.timestamp < prev_ts_)
            throw DataError(path_ + " row " + std::to_string(rows_read_) +
                            ": timestamp regression");
        prev_ts_ = out.timestamp;
        have_prev_ts_ = true;
        return true;
    }
    return false;
}

std::vector<MboMessage> read_feed(const std::string& path) {
    FeedReader reader(path);
    std::vector<MboMessage> messages;
    MboMessage msg;
    while (reader.next(msg)) messages.push_back(msg);
    return messages;
}

FeedWriter::FeedWriter(const std::string& path) {
    out_.open(path);
    if (!out_) throw IoError("cannot open feed file for writing: " + path);
    out_ << kFeedHeader << '\n';
}

void FeedWriter::write(const MboMessage& msg) { out_ << serialize_mbo(msg) << '\n'; }

std::string snapshot_violation(const LobSnapshot& snap) {
    for (std::size_t i = 1; i < snap.asks.size(); ++i)
        if (snap.asks[i].price <= snap.asks[i - 1].price) return "ask prices not increasing";
    for (std::size_t i = 1; i < snap.bids.size(); ++i)
        if (snap.bids[i].price >= snap.bids[i - 1].price) return "bid prices not decreasing";
    if (!snap.bids.empty() && !snap.asks.empty() && snap.bids[0].price >= snap.asks[0].price)
        return "best bid not below best ask";
    if (snap.asks.size() > kSnapshotDepth || snap.bids.size() > kSnapshotDepth)
        return "more than 10 levels";
    return {};
}

std::string snapshot_csv_header() {
    std::string h = "timestamp";
    for (int i = 1; i <= kSnapshotDepth; ++i)
        h += ",ask_px_" + std::to_string(i) + ",ask_sz_" + std::to_string(i);
    for (int i = 1; i <= kSnapshotDepth; ++i)
        h += ",bid_px_" + std::to_string(i) + ",bid_sz_" + std::to_string(i);
    return h;
}

std::string serialize_snapshot(const LobSnapshot& snap) {
    std::string s = snap.timestamp.to_string();
    auto emit_side = [&s](const std::vector<SnapshotLevel>& levels) {
        for (int i = 0; i < kSnapshotDepth; ++i) {
            if (i < static_cast<int>(levels.size())) {
                s += ',' + levels[i].price.to_string(0);
                s += ',' + levels[i].size.to_string(1);
            } else {
                s += ",,";
            }
        }
    };
    emit_side(snap.asks);
    emit_side(snap.bids);
    return s;
}

LobSnapshot parse_snapshot_line(std::string_view line) {
    line = strip_cr(line);
    auto fields = split_csv(line);
    if (fields.size() != 1 + 4 * kSnapshotDepth)
        throw ParseError("expected " + std::to_string(1 + 4 * kSnapshotDepth) +
                         " fields, got " + std::to_string(fields.size()));
    LobSnapshot snap;
    if (!Timestamp::parse(fields[0], snap.timestamp))
        throw ParseError("malformed timestamp: '" + std::string(fields[0]) + "'");
    auto read_side = [&fields](std::size_t base, std::vector<SnapshotLevel>& out) {
        for (int i = 0; i < kSnapshotDepth; ++i) {
            std::string_view px = fields[base + 2 * i];
            std::string_view sz = fields[base + 2 * i + 1];
            if (px.empty() != sz.empty()) throw ParseError("half-absent level");
            if (px.empty()) continue;
            SnapshotLevel lvl;
            lvl.price = parse_decimal_field(px, "level price");
            lvl.size = parse_decimal_field(sz, "level size");
            out.push_back(lvl);
        }
    };
    read_side(1, snap.asks);
    read_side(1 + 2 * kSnapshotDepth, snap.bids);
    if (auto why = snapshot_violation(snap); !why.empty()) throw ParseError(why);
    return snap;
}

SnapshotWriter::SnapshotWriter(const std::string& path) {
    out_.open(path);
    if (!out_) throw IoError("cannot open snapshot file for writing: " + path);
    out_ << snapshot_csv_header() << '\n';
}

void SnapshotWriter::write(const LobSnapshot& snap) { out_ << serialize_snapshot(snap) << '\n'; }

std::vector<LobSnapshot> read_snapshots(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open snapshot file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file, missing header");
    if (std::string(strip_cr(line)) != snapshot_csv_header())
        throw ParseError(path + ": unexpected header");
    std::vector<LobSnapshot> snaps;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (strip_cr(line).empty()) continue;
        ++row;
        try {
            snaps.push_back(parse_snapshot_line(line));
        } catch (const ParseError& e) {
            throw ParseError(path + " row " + std::to_string(row) + ": " + e.what());
        }
    }
    return snaps;
}

}  // namespace mbo
