#pragma once

#include <array>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbo/message.hpp"

namespace mbo {

constexpr int kSnapshotDepth = 10;

// Depth-10 view of one book side at one instant. Levels are best-first;
// a book shallower than 10 levels leaves the tail levels absent.
struct SnapshotLevel {
    Decimal price;
    Decimal size;
};

struct LobSnapshot {
    Timestamp timestamp;
    std::vector<SnapshotLevel> asks;  // ascending price
    std::vector<SnapshotLevel> bids;  // descending price

    bool operator==(const LobSnapshot&) const = default;
};

// Returns an empty string when the snapshot satisfies its ordering
// invariants, else the reason.
std::string snapshot_violation(const LobSnapshot& snap);

// --- MBO feed CSV ----------------------------------------------------------
// Header: timestamp,id,type,side,action,price,size
// Timestamps use nine fractional digits; absent optional fields are empty
// cells, never sentinel numbers.

extern const char kFeedHeader[];

// Parses one data row. Throws ParseError naming the offending field.
MboMessage parse_mbo_line(std::string_view line);

// Canonical row text. parse_mbo_line(serialize_mbo(m)) == m for valid m.
std::string serialize_mbo(const MboMessage& msg);

// Streaming reader: opens the file, checks the header, yields rows in file
// order while enforcing non-decreasing timestamps. Memory use is one row.
class FeedReader {
public:
    explicit FeedReader(const std::string& path);

    // Returns false at end of file. Throws ParseError/DataError with the
    // 1-based data-row number on a malformed row or timestamp regression.
    bool next(MboMessage& out);

    std::size_t rows_read() const { return rows_read_; }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t rows_read_ = 0;
    bool have_prev_ts_ = false;
    Timestamp prev_ts_;
};

std::vector<MboMessage> read_feed(const std::string& path);

class FeedWriter {
public:
    explicit FeedWriter(const std::string& path);
    void write(const MboMessage& msg);

private:
    std::ofstream out_;
};

// --- Snapshot CSV -----------------------------------------------------------
// Header: timestamp,ask_px_1,ask_sz_1,...,ask_px_10,ask_sz_10,
//         bid_px_1,bid_sz_1,...,bid_px_10,bid_sz_10

std::string snapshot_csv_header();
std::string serialize_snapshot(const LobSnapshot& snap);
LobSnapshot parse_snapshot_line(std::string_view line);

class SnapshotWriter {
public:
    explicit SnapshotWriter(const std::string& path);
    void write(const LobSnapshot& snap);

private:
    std::ofstream out_;
};

std::vector<LobSnapshot> read_snapshots(const std::string& path);

// Splits a CSV row on commas; no quoting in any of our schemas.
std::vector<std::string_view> split_csv(std::string_view line);

}  // namespace mbo
