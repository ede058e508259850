#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metacurate/common.hpp"

namespace metacurate {

// A text record flowing through the pipeline. `doc` keeps the original
// JSON object so extra fields pass through untouched; uid/text are
// unpacked for fast access.
struct Record {
  std::string uid;
  std::string text;
  std::vector<EntryId> matched_entry_ids;
  nlohmann::ordered_json doc;

  void sync_matches_into_doc() {
    doc["matched_entry_ids"] = matched_entry_ids;
  }
};

// Line-oriented JSONL reader. Malformed lines (bad JSON, missing or
// non-string uid/text) are skipped and counted, never fatal: web-scale
// shards always contain garbage rows.
class JsonlReader {
 public:
  explicit JsonlReader(const std::string& path, bool want_matches = false,
                       std::ostream* diag = &std::cerr)
      : in_(path, std::ios::binary),
        path_(path),
        want_matches_(want_matches),
        diag_(diag) {
    if (!in_) throw IoError("cannot open shard: " + path);
  }

  bool next(Record& rec) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lines_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (parse_line(line, rec)) return true;
      ++skipped_;
      if (diag_ && skipped_ <= kMaxDiagnostics) {
        (*diag_) << "metacurate: skipping malformed record at " << path_ << ":"
                 << lines_ << "\n";
      }
    }
    return false;
  }

  std::uint64_t lines_read() const { return lines_; }
  std::uint64_t skipped() const { return skipped_; }

 private:
  static constexpr std::uint64_t kMaxDiagnostics = 20;

  bool parse_line(const std::string& line, Record& rec) {
    nlohmann::ordered_json doc =
        nlohmann::ordered_json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return false;
    auto uid = doc.find("uid");
    auto text = doc.find("text");
    if (uid == doc.end() || text == doc.end() || !uid->is_string() ||
        !text->is_string())
      return false;
    rec.uid = uid->get<std::string>();
    rec.text = text->get<std::string>();
    rec.matched_entry_ids.clear();
    if (want_matches_) {
      auto m = doc.find("matched_entry_ids");
      if (m == doc.end() || !m->is_array()) return false;
      for (const auto& v : *m) {
        if (!v.is_number_unsigned()) return false;
        rec.matched_entry_ids.push_back(v.get<EntryId>());
      }
      std::sort(rec.matched_entry_ids.begin(), rec.matched_entry_ids.end());
      rec.matched_entry_ids.erase(std::unique(rec.matched_entry_ids.begin(),
                                              rec.matched_entry_ids.end()),
                                  rec.matched_entry_ids.end());
    }
    rec.doc = std::move(doc);
    return true;
  }

  std::ifstream in_;
  std::string path_;
  bool want_matches_;
  std::ostream* diag_;
  std::uint64_t lines_ = 0;
  std::uint64_t skipped_ = 0;
};

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw IoError("cannot write shard: " + path);
  }

  void write(const Record& rec) {
    out_ << rec.doc.dump() << '\n';
    ++written_;
  }

  std::uint64_t written() const { return written_; }

  void close() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
    out_.close();
  }

 private:
  std::ofstream out_;
  std::string path_;
  std::uint64_t written_ = 0;
};

}  // namespace metacurate
