/*
 * Copyright 2026 The calrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "calrec/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "calrec/errors.hpp"
#include "calrec/random.hpp"
#include "format.hpp"

namespace calrec {
namespace {

// Splits `line` on every occurrence of `sep`.
std::vector<std::string_view> SplitOn(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
}

template <typename T>
bool ParseNumber(std::string_view field, T& out) {
  if (field.empty()) return false;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void FailLine(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

// Calls fn(line, line_no) for every non-empty line, stripping a trailing CR.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line, line_no);
    start = end + 1;
  }
}

RatingRecord ParseRecordFields(std::span<const std::string_view> fields, std::size_t line_no) {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double rating = 0;
  std::int64_t timestamp = 0;
  if (!ParseNumber(fields[0], user)) FailLine(line_no, "non-numeric user id '" + std::string(fields[0]) + "'");
  if (!ParseNumber(fields[1], item)) FailLine(line_no, "non-numeric item id '" + std::string(fields[1]) + "'");
  if (!ParseNumber(fields[2], rating)) FailLine(line_no, "non-numeric rating '" + std::string(fields[2]) + "'");
  if (!ParseNumber(fields[3], timestamp)) {
    FailLine(line_no, "non-numeric timestamp '" + std::string(fields[3]) + "'");
  }
  if (!(rating >= kMinRating && rating <= kMaxRating)) {
    FailLine(line_no, "rating " + std::string(fields[2]) + " outside [1, 5]");
  }
  return {UserId{user}, ItemId{item}, rating, timestamp};
}

Dataset BuildChecked(std::vector<RatingRecord> records, const std::vector<std::size_t>& line_numbers) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(raw(records[a].user), raw(records[a].item)) <
           std::pair(raw(records[b].user), raw(records[b].item));
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& prev = records[order[k - 1]];
    const auto& cur = records[order[k]];
    if (prev.user == cur.user && prev.item == cur.item) {
      const std::size_t first = std::min(line_numbers[order[k - 1]], line_numbers[order[k]]);
      const std::size_t second = std::max(line_numbers[order[k - 1]], line_numbers[order[k]]);
      FailLine(second, "duplicate rating for user " + std::to_string(raw(cur.user)) + " item " +
                           std::to_string(raw(cur.item)) + " (first seen on line " +
                           std::to_string(first) + ")");
    }
  }
  return Dataset::FromRecords(std::move(records));
}

}  // namespace

Dataset Dataset::FromRecords(std::vector<RatingRecord> records) {
  Dataset d;
  std::vector<std::int64_t> users;
  std::vector<std::int64_t> items;
  users.reserve(records.size());
  items.reserve(records.size());
  for (const auto& r : records) {
    if (!(r.rating >= kMinRating && r.rating <= kMaxRating)) {
      throw ArgumentError("rating " + FormatDouble(r.rating) + " outside [1, 5] for user " +
                          std::to_string(raw(r.user)));
    }
    users.push_back(raw(r.user));
    items.push_back(raw(r.item));
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());

  d.user_ids_.reserve(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    d.user_ids_.push_back(UserId{users[u]});
    d.user_lookup_.emplace(users[u], static_cast<std::uint32_t>(u));
  }
  d.item_ids_.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    d.item_ids_.push_back(ItemId{items[i]});
    d.item_lookup_.emplace(items[i], static_cast<std::uint32_t>(i));
  }

  std::vector<std::size_t> user_counts(users.size() + 1, 0);
  std::vector<std::size_t> item_counts(items.size() + 1, 0);
  for (const auto& r : records) {
    ++user_counts[d.user_lookup_.at(raw(r.user)) + 1];
    ++item_counts[d.item_lookup_.at(raw(r.item)) + 1];
  }
  std::partial_sum(user_counts.begin(), user_counts.end(), user_counts.begin());
  std::partial_sum(item_counts.begin(), item_counts.end(), item_counts.begin());
  d.user_offsets_ = user_counts;
  d.item_offsets_ = item_counts;
  d.user_cells_.resize(records.size());
  d.item_cells_.resize(records.size());
  for (const auto& r : records) {
    const auto u = d.user_lookup_.at(raw(r.user));
    const auto i = d.item_lookup_.at(raw(r.item));
    d.user_cells_[user_counts[u]++] = {i, r.rating};
    d.item_cells_[item_counts[i]++] = {u, r.rating};
  }
  auto by_index = [](const Cell& a, const Cell& b) { return a.index < b.index; };
  for (std::size_t u = 0; u < users.size(); ++u) {
    auto begin = d.user_cells_.begin() + static_cast<std::ptrdiff_t>(d.user_offsets_[u]);
    auto end = d.user_cells_.begin() + static_cast<std::ptrdiff_t>(d.user_offsets_[u + 1]);
    std::sort(begin, end, by_index);
    for (auto it = begin; it != end && it + 1 != end; ++it) {
      if (it->index == (it + 1)->index) {
        throw ArgumentError("duplicate rating for user " + std::to_string(users[u]) + " item " +
                            std::to_string(items[it->index]));
      }
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::sort(d.item_cells_.begin() + static_cast<std::ptrdiff_t>(d.item_offsets_[i]),
              d.item_cells_.begin() + static_cast<std::ptrdiff_t>(d.item_offsets_[i + 1]), by_index);
  }
  d.records_ = std::move(records);
  return d;
}

std::optional<std::size_t> Dataset::find_user(UserId id) const {
  auto it = user_lookup_.find(raw(id));
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Dataset::find_item(ItemId id) const {
  auto it = item_lookup_.find(raw(id));
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::user_index(UserId id) const {
  if (auto u = find_user(id)) return *u;
  throw LookupError("unknown user " + std::to_string(raw(id)));
}

std::size_t Dataset::item_index(ItemId id) const {
  if (auto i = find_item(id)) return *i;
  throw LookupError("unknown item " + std::to_string(raw(id)));
}

double Dataset::user_mean(std::size_t u) const {
  double sum = 0;
  for (const Cell& c : user_row(u)) sum += c.rating;
  return sum / static_cast<double>(user_row(u).size());
}

double Dataset::item_mean(std::size_t i) const {
  double sum = 0;
  for (const Cell& c : item_row(i)) sum += c.rating;
  return sum / static_cast<double>(item_row(i).size());
}

double Dataset::global_mean() const {
  if (records_.empty()) return 0.0;
  double sum = 0;
  for (const auto& r : records_) sum += r.rating;
  return sum / static_cast<double>(records_.size());
}

std::vector<std::pair<ItemId, double>> Dataset::profile(UserId id) const {
  std::vector<std::pair<ItemId, double>> out;
  for (const Cell& c : user_row(user_index(id))) out.emplace_back(item_ids_[c.index], c.rating);
  return out;
}

Dataset ParseRatings(std::string_view text) {
  std::vector<RatingRecord> records;
  std::vector<std::size_t> line_numbers;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = SplitOn(line, "::");
    if (fields.size() != 4) {
      FailLine(line_no, "expected 4 '::'-separated fields, got " + std::to_string(fields.size()));
    }
    records.push_back(ParseRecordFields(fields, line_no));
    line_numbers.push_back(line_no);
  });
  return BuildChecked(std::move(records), line_numbers);
}

std::string SerializeRatings(const Dataset& dataset) {
  std::string out;
  for (const auto& r : dataset.records()) {
    out += std::to_string(raw(r.user));
    out += "::";
    out += std::to_string(raw(r.item));
    out += "::";
    out += FormatDouble(r.rating);
    out += "::";
    out += std::to_string(r.timestamp);
    out += '\n';
  }
  return out;
}

std::string SerializeRatingsCsv(const Dataset& dataset) {
  std::string out = "user_id,item_id,rating,timestamp\n";
  for (const auto& r : dataset.records()) {
    out += std::to_string(raw(r.user));
    out += ',';
    out += std::to_string(raw(r.item));
    out += ',';
    out += FormatDouble(r.rating);
    out += ',';
    out += std::to_string(r.timestamp);
    out += '\n';
  }
  return out;
}

Dataset ParseRatingsCsv(std::string_view text) {
  std::vector<RatingRecord> records;
  std::vector<std::size_t> line_numbers;
  bool header = true;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    if (header) {
      header = false;
      if (line != "user_id,item_id,rating,timestamp") FailLine(line_no, "missing CSV header");
      return;
    }
    const auto fields = SplitOn(line, ",");
    if (fields.size() != 4) {
      FailLine(line_no, "expected 4 comma-separated fields, got " + std::to_string(fields.size()));
    }
    records.push_back(ParseRecordFields(fields, line_no));
    line_numbers.push_back(line_no);
  });
  return BuildChecked(std::move(records), line_numbers);
}

ItemCatalog ItemCatalog::FromGenres(std::map<std::int64_t, std::vector<std::string>> genres_of) {
  ItemCatalog catalog;
  std::set<std::string> all;
  for (const auto& [item, genres] : genres_of) {
    if (genres.empty()) throw ArgumentError("item " + std::to_string(item) + " has no genres");
    all.insert(genres.begin(), genres.end());
  }
  auto universe = std::make_shared<std::vector<std::string>>(all.begin(), all.end());
  for (const auto& [item, genres] : genres_of) {
    std::vector<std::size_t> idx;
    for (const auto& g : genres) {
      idx.push_back(static_cast<std::size_t>(
          std::lower_bound(universe->begin(), universe->end(), g) - universe->begin()));
    }
    catalog.genre_index_of_.emplace(item, std::move(idx));
  }
  catalog.genres_of_ = std::move(genres_of);
  catalog.universe_ = std::move(universe);
  return catalog;
}

const std::vector<std::string>& ItemCatalog::genres(ItemId item) const {
  auto it = genres_of_.find(raw(item));
  if (it == genres_of_.end()) throw LookupError("item " + std::to_string(raw(item)) + " not in catalog");
  return it->second;
}

const std::vector<std::size_t>& ItemCatalog::genre_indices(ItemId item) const {
  auto it = genre_index_of_.find(raw(item));
  if (it == genre_index_of_.end()) {
    throw LookupError("item " + std::to_string(raw(item)) + " not in catalog");
  }
  return it->second;
}

ItemCatalog ParseItems(std::string_view text) {
  std::map<std::int64_t, std::vector<std::string>> genres_of;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    const std::size_t first = line.find("::");
    const std::size_t last = line.rfind("::");
    if (first == std::string_view::npos || first == last) {
      FailLine(line_no, "expected MovieID::Title::Genres");
    }
    std::int64_t item = 0;
    if (!ParseNumber(line.substr(0, first), item)) FailLine(line_no, "non-numeric movie id");
    const std::string_view genre_field = line.substr(last + 2);
    if (genre_field.empty()) FailLine(line_no, "empty genre list for movie " + std::to_string(item));
    std::vector<std::string> genres;
    for (std::string_view g : SplitOn(genre_field, "|")) {
      if (g.empty()) FailLine(line_no, "empty genre label for movie " + std::to_string(item));
      std::string label(g);
      if (std::find(genres.begin(), genres.end(), label) == genres.end()) genres.push_back(std::move(label));
    }
    if (!genres_of.emplace(item, std::move(genres)).second) {
      FailLine(line_no, "duplicate movie id " + std::to_string(item));
    }
  });
  return ItemCatalog::FromGenres(std::move(genres_of));
}

std::size_t TrainCount(std::size_t n, double train_fraction) {
  // The epsilon keeps products such as 0.7 * 10 = 7.000000000000001 from
  // rounding up to the next integer.
  const double target = std::ceil(train_fraction * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(target, 0.0)), std::min<std::size_t>(n, 1), n);
}

SplitPair Split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1), got " + FormatDouble(train_fraction));
  }
  // Records of each user in ascending item order, so the split does not
  // depend on the order of the input file.
  std::vector<std::vector<std::size_t>> by_user(dataset.num_users());
  {
    const auto records = dataset.records();
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return raw(records[a].item) < raw(records[b].item);
    });
    for (std::size_t k : order) by_user[dataset.user_index(records[k].user)].push_back(k);
  }
  std::vector<RatingRecord> train;
  std::vector<RatingRecord> test;
  train.reserve(dataset.size());
  const auto records = dataset.records();
  for (std::size_t u = 0; u < by_user.size(); ++u) {
    auto& rows = by_user[u];
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(raw(dataset.user_id(u)))));
    rng.shuffle(std::span<std::size_t>(rows));
    const std::size_t n_train = TrainCount(rows.size(), train_fraction);
    std::vector<std::size_t> train_rows(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    auto by_item = [&](std::size_t a, std::size_t b) { return raw(records[a].item) < raw(records[b].item); };
    std::sort(train_rows.begin(), train_rows.end(), by_item);
    std::sort(test_rows.begin(), test_rows.end(), by_item);
    for (std::size_t k : train_rows) train.push_back(records[k]);
    for (std::size_t k : test_rows) test.push_back(records[k]);
  }
  return {Dataset::FromRecords(std::move(train)), Dataset::FromRecords(std::move(test)), seed};
}

std::map<ItemId, double> ItemMeans(const Dataset& train) {
  if (train.empty()) throw ArgumentError("item means of an empty dataset");
  std::map<ItemId, double> means;
  for (std::size_t i = 0; i < train.num_items(); ++i) means.emplace(train.item_id(i), train.item_mean(i));
  return means;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return std::move(buf).str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace calrec
