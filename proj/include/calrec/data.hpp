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

#ifndef CALREC_DATA_HPP_
#define CALREC_DATA_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace calrec {

enum class UserId : std::int64_t {};
enum class ItemId : std::int64_t {};

constexpr std::int64_t raw(UserId id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t raw(ItemId id) { return static_cast<std::int64_t>(id); }

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;

struct RatingRecord {
  UserId user;
  ItemId item;
  double rating;
  std::int64_t timestamp;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

// One non-zero of the sparse rating matrix as seen from a row. `index` is the
// dense index of the column entity (an item for user rows, a user for item
// rows).
struct Cell {
  std::uint32_t index;
  double rating;
};

// Immutable sparse rating matrix. Users and items are assigned dense indices
// in ascending id order; rows are sorted by the dense index of the other
// side. Both orientations hold exactly the triples of records().
class Dataset {
 public:
  Dataset() = default;

  // Throws ArgumentError on a duplicate (user, item) pair or a rating outside
  // [1, 5].
  static Dataset FromRecords(std::vector<RatingRecord> records);

  std::span<const RatingRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }

  UserId user_id(std::size_t u) const { return user_ids_[u]; }
  ItemId item_id(std::size_t i) const { return item_ids_[i]; }
  std::span<const UserId> user_ids() const { return user_ids_; }
  std::span<const ItemId> item_ids() const { return item_ids_; }

  std::optional<std::size_t> find_user(UserId id) const;
  std::optional<std::size_t> find_item(ItemId id) const;

  // Throw LookupError when the id is absent.
  std::size_t user_index(UserId id) const;
  std::size_t item_index(ItemId id) const;

  std::span<const Cell> user_row(std::size_t u) const {
    return {user_cells_.data() + user_offsets_[u], user_cells_.data() + user_offsets_[u + 1]};
  }
  std::span<const Cell> item_row(std::size_t i) const {
    return {item_cells_.data() + item_offsets_[i], item_cells_.data() + item_offsets_[i + 1]};
  }

  // Mean train rating of a user or an item row.
  double user_mean(std::size_t u) const;
  double item_mean(std::size_t i) const;
  double global_mean() const;

  // (item, rating) pairs of one user in ascending item id order.
  std::vector<std::pair<ItemId, double>> profile(UserId id) const;

 private:
  std::vector<RatingRecord> records_;
  std::vector<UserId> user_ids_;
  std::vector<ItemId> item_ids_;
  std::unordered_map<std::int64_t, std::uint32_t> user_lookup_;
  std::unordered_map<std::int64_t, std::uint32_t> item_lookup_;
  std::vector<std::size_t> user_offsets_{0};
  std::vector<Cell> user_cells_;
  std::vector<std::size_t> item_offsets_{0};
  std::vector<Cell> item_cells_;
};

// Parses MovieLens "UserID::MovieID::Rating::Timestamp" lines. Empty lines
// are skipped; anything else malformed raises ParseError naming the line.
Dataset ParseRatings(std::string_view text);

// Inverse of ParseRatings, records in dataset order.
std::string SerializeRatings(const Dataset& dataset);

// Canonical CSV with header "user_id,item_id,rating,timestamp".
std::string SerializeRatingsCsv(const Dataset& dataset);
Dataset ParseRatingsCsv(std::string_view text);

class ItemCatalog {
 public:
  ItemCatalog() = default;

  // Builds the universe as the sorted union of all genres.
  static ItemCatalog FromGenres(std::map<std::int64_t, std::vector<std::string>> genres_of);

  std::span<const std::string> genre_universe() const { return *universe_; }
  std::shared_ptr<const std::vector<std::string>> shared_universe() const { return universe_; }
  std::size_t num_items() const { return genres_of_.size(); }
  bool contains(ItemId item) const { return genres_of_.contains(raw(item)); }

  // Genre labels of an item in file order; LookupError if unknown.
  const std::vector<std::string>& genres(ItemId item) const;
  // Same genres as indices into genre_universe().
  const std::vector<std::size_t>& genre_indices(ItemId item) const;

 private:
  std::map<std::int64_t, std::vector<std::string>> genres_of_;
  std::map<std::int64_t, std::vector<std::size_t>> genre_index_of_;
  std::shared_ptr<const std::vector<std::string>> universe_ =
      std::make_shared<const std::vector<std::string>>();
};

// Parses MovieLens "MovieID::Title::Genre1|Genre2" lines. Titles are opaque
// bytes and may be Latin-1.
ItemCatalog ParseItems(std::string_view text);

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

// Per-user stratified split: each user's ratings, ordered by item id, are
// shuffled with a generator derived from (seed, user id) and the first
// ceil(train_fraction * n) go to train. Throws ArgumentError unless
// 0 < train_fraction < 1.
SplitPair Split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

// Number of a user's n ratings assigned to train.
std::size_t TrainCount(std::size_t n, double train_fraction);

// Arithmetic mean of every item's ratings. Throws ArgumentError on an empty
// dataset.
std::map<ItemId, double> ItemMeans(const Dataset& train);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace calrec

#endif  // CALREC_DATA_HPP_
