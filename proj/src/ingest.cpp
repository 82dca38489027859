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

#include "poisonrec/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "poisonrec/errors.hpp"

namespace poisonrec {

namespace {

struct RawEntry {
  long long user;
  long long item;
  double value;
};

long long parse_ll(const std::string& field, std::size_t line, const char* what) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (errno != 0 || end == field.c_str() || *end != '\0') {
    throw ParseError(std::string("malformed ") + what + " '" + field + "'", line);
  }
  return v;
}

double parse_rating(const std::string& field, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (errno != 0 || end == field.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ParseError("malformed rating '" + field + "'", line);
  }
  if (v < RatingsMatrix::kMinRating || v > RatingsMatrix::kMaxRating) {
    throw InvalidInputError("rating " + field + " outside [1, 5] at line " +
                            std::to_string(line));
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

IngestResult assemble(std::vector<RawEntry> raw) {
  if (raw.empty()) throw InvalidInputError("dataset contains no ratings");

  std::unordered_map<long long, int> user_map;
  std::unordered_map<long long, int> item_map;
  IngestResult out{RatingsMatrix(0, 0), {}, {}};
  for (const auto& e : raw) {
    if (user_map.emplace(e.user, static_cast<int>(out.user_ids.size())).second) {
      out.user_ids.push_back(e.user);
    }
    if (item_map.emplace(e.item, static_cast<int>(out.item_ids.size())).second) {
      out.item_ids.push_back(e.item);
    }
  }
  out.ratings = RatingsMatrix(static_cast<int>(out.user_ids.size()),
                              static_cast<int>(out.item_ids.size()));
  for (const auto& e : raw) {
    out.ratings.add(user_map.at(e.user), item_map.at(e.item), e.value);
  }
  return out;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

IngestResult parse_movielens(std::istream& in) {
  std::vector<RawEntry> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    raw.push_back({parse_ll(fields[0], line_no, "user id"),
                   parse_ll(fields[1], line_no, "item id"),
                   parse_rating(fields[2], line_no)});
    // fields[3] is the timestamp; unused.
  }
  return assemble(std::move(raw));
}

IngestResult parse_movielens(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_movielens(in);
}

IngestResult parse_ratings_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "user_id,book_id,rating") {
    throw ParseError("expected header 'user_id,book_id,rating'", 1);
  }
  std::vector<RawEntry> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw ParseError("expected 3 comma-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    raw.push_back({parse_ll(fields[0], line_no, "user id"),
                   parse_ll(fields[1], line_no, "item id"),
                   parse_rating(fields[2], line_no)});
  }
  return assemble(std::move(raw));
}

IngestResult parse_ratings_csv(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_ratings_csv(in);
}

void write_ratings_csv(std::ostream& out, const IngestResult& data) {
  out << "user_id,book_id,rating\n";
  char buf[64];
  for (int u = 0; u < data.ratings.n_users(); ++u) {
    for (const auto& [item, value] : data.ratings.items_of(u)) {
      std::snprintf(buf, sizeof(buf), "%.17g", value);
      out << data.user_ids[static_cast<std::size_t>(u)] << ','
          << data.item_ids[static_cast<std::size_t>(item)] << ',' << buf << '\n';
    }
  }
}

void write_ratings_csv(const std::string& path, const IngestResult& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_ratings_csv(out, data);
  if (!out) throw IoError("failed writing '" + path + "'");
}

IngestResult with_identity_ids(RatingsMatrix matrix) {
  IngestResult out{std::move(matrix), {}, {}};
  out.user_ids.resize(static_cast<std::size_t>(out.ratings.n_users()));
  out.item_ids.resize(static_cast<std::size_t>(out.ratings.n_items()));
  std::iota(out.user_ids.begin(), out.user_ids.end(), 0);
  std::iota(out.item_ids.begin(), out.item_ids.end(), 0);
  return out;
}

IngestResult dense_subset(const IngestResult& data, int top_users, int top_items) {
  const auto& m = data.ratings;
  if (top_users < 1 || top_users > m.n_users() || top_items < 1 || top_items > m.n_items()) {
    throw InvalidInputError("dense_subset: requested counts exceed matrix dimensions");
  }

  // Rank by rating count, ties by ascending external id.
  auto rank = [](std::vector<std::pair<long long, long long>>& keyed, int take) {
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    keyed.resize(static_cast<std::size_t>(take));
  };

  std::vector<std::pair<long long, long long>> users;  // (count, external id)
  users.reserve(static_cast<std::size_t>(m.n_users()));
  for (int u = 0; u < m.n_users(); ++u) {
    users.emplace_back(static_cast<long long>(m.items_of(u).size()),
                       data.user_ids[static_cast<std::size_t>(u)]);
  }
  rank(users, top_users);

  std::unordered_map<long long, int> ext_user_to_old;
  for (int u = 0; u < m.n_users(); ++u) {
    ext_user_to_old.emplace(data.user_ids[static_cast<std::size_t>(u)], u);
  }
  std::vector<int> kept_users;
  kept_users.reserve(users.size());
  for (const auto& [count, ext] : users) kept_users.push_back(ext_user_to_old.at(ext));
  std::sort(kept_users.begin(), kept_users.end());

  std::vector<bool> user_kept(static_cast<std::size_t>(m.n_users()), false);
  for (int u : kept_users) user_kept[static_cast<std::size_t>(u)] = true;

  // Re-count items over the kept users only.
  std::vector<long long> item_counts(static_cast<std::size_t>(m.n_items()), 0);
  for (int u : kept_users) {
    for (const auto& [item, value] : m.items_of(u)) ++item_counts[static_cast<std::size_t>(item)];
  }
  std::vector<std::pair<long long, long long>> items;
  items.reserve(static_cast<std::size_t>(m.n_items()));
  for (int j = 0; j < m.n_items(); ++j) {
    items.emplace_back(item_counts[static_cast<std::size_t>(j)],
                       data.item_ids[static_cast<std::size_t>(j)]);
  }
  rank(items, top_items);

  std::unordered_map<long long, int> ext_item_to_old;
  for (int j = 0; j < m.n_items(); ++j) {
    ext_item_to_old.emplace(data.item_ids[static_cast<std::size_t>(j)], j);
  }
  std::vector<int> kept_items;
  kept_items.reserve(items.size());
  for (const auto& [count, ext] : items) kept_items.push_back(ext_item_to_old.at(ext));
  std::sort(kept_items.begin(), kept_items.end());

  std::vector<int> new_item_id(static_cast<std::size_t>(m.n_items()), -1);
  IngestResult out{RatingsMatrix(top_users, top_items), {}, {}};
  for (std::size_t idx = 0; idx < kept_items.size(); ++idx) {
    new_item_id[static_cast<std::size_t>(kept_items[idx])] = static_cast<int>(idx);
    out.item_ids.push_back(data.item_ids[static_cast<std::size_t>(kept_items[idx])]);
  }
  for (std::size_t idx = 0; idx < kept_users.size(); ++idx) {
    const int old_u = kept_users[idx];
    out.user_ids.push_back(data.user_ids[static_cast<std::size_t>(old_u)]);
    for (const auto& [item, value] : m.items_of(old_u)) {
      const int nj = new_item_id[static_cast<std::size_t>(item)];
      if (nj >= 0) out.ratings.add(static_cast<int>(idx), nj, value);
    }
  }
  return out;
}

}  // namespace poisonrec
