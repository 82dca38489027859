// Copyright 2026 the poisonrec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "poisonrec/ratings.hpp"

namespace poisonrec {

// Parsed dataset with contiguous 0-based internal ids. external ids are kept
// so subsets and writers can refer back to the source numbering;
// user_ids[i] / item_ids[j] give the external id of internal user i / item j.
struct IngestResult {
  RatingsMatrix ratings;
  std::vector<long long> user_ids;
  std::vector<long long> item_ids;
};

// MovieLens-100K `u.data` layout: user<TAB>item<TAB>rating<TAB>timestamp.
// Timestamps are discarded.
IngestResult parse_movielens(const std::string& path);
IngestResult parse_movielens(std::istream& in);

// Generic ratings CSV with header `user_id,book_id,rating`. This is also the
// canonical on-disk format written by write_ratings_csv and the synthetic
// generators, so datasets round-trip.
IngestResult parse_ratings_csv(const std::string& path);
IngestResult parse_ratings_csv(std::istream& in);

void write_ratings_csv(const std::string& path, const IngestResult& data);
void write_ratings_csv(std::ostream& out, const IngestResult& data);

// Wraps a matrix whose internal ids are already the external numbering.
IngestResult with_identity_ids(RatingsMatrix matrix);

// Keeps the top_users users with the most ratings (ties by ascending external
// id), then the top_items items with the most ratings among those users, and
// reindexes.
IngestResult dense_subset(const IngestResult& data, int top_users, int top_items);

}  // namespace poisonrec
