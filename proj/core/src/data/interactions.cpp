#include "pretrec/data/interactions.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "pretrec/error.hpp"
#include "text_util.hpp"

namespace pretrec {

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
    case Split::unassigned: break;
  }
  return "unassigned";
}

std::size_t IndexMap::intern(std::string_view raw) {
  std::string key(raw);
  auto [it, inserted] = index_.try_emplace(key, raw_.size());
  if (inserted) raw_.push_back(std::move(key));
  return it->second;
}

std::optional<std::size_t> IndexMap::find(std::string_view raw) const {
  auto it = index_.find(std::string(raw));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void IndexMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write index map " + path.string());
  for (std::size_t i = 0; i < raw_.size(); ++i) out << raw_[i] << '\t' << i << '\n';
  if (!out) throw IoError("failed writing index map " + path.string());
}

IndexMap IndexMap::load(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  IndexMap map;
  std::size_t line_no = 0;
  for (std::string_view line : detail::lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 2) throw ParseError("index map: expected 2 fields", line_no);
    const std::size_t idx = detail::parse_index(fields[1], line_no);
    if (idx != map.size()) throw ParseError("index map: dense indices must be 0..n-1 in order", line_no);
    map.intern(fields[0]);
  }
  return map;
}

IndexMap IndexMap::identity(std::size_t n) {
  IndexMap map;
  for (std::size_t i = 0; i < n; ++i) map.intern(std::to_string(i));
  return map;
}

std::size_t InteractionMatrix::count(Split s) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [s](const Interaction& e) { return e.split == s; }));
}

void InteractionMatrix::validate() const {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : entries) {
    if (e.user >= n_users || e.item >= n_items) {
      throw DataError("interaction (" + std::to_string(e.user) + ", " + std::to_string(e.item) +
                      ") out of range");
    }
    if (!seen.emplace(e.user, e.item).second) {
      throw DataError("duplicate interaction (" + std::to_string(e.user) + ", " +
                      std::to_string(e.item) + ")");
    }
  }
  if (!eval_excluded.empty() && eval_excluded.size() != n_users) {
    throw DataError("eval_excluded must have one flag per user");
  }
}

UserItemIndex::UserItemIndex(const InteractionMatrix& m)
    : n_items_(m.n_items),
      all_(m.n_users),
      train_(m.n_users),
      validation_(m.n_users),
      test_(m.n_users) {
  for (const auto& e : m.entries) {
    all_[e.user].push_back(e.item);
    switch (e.split) {
      case Split::train:
      case Split::unassigned: train_[e.user].push_back(e.item); break;
      case Split::validation: validation_[e.user] = e.item; break;
      case Split::test: test_[e.user] = e.item; break;
    }
  }
  for (auto& v : all_) std::sort(v.begin(), v.end());
  for (auto& v : train_) std::sort(v.begin(), v.end());
}

bool UserItemIndex::interacted(std::size_t user, std::size_t item) const {
  return std::binary_search(all_[user].begin(), all_[user].end(), item);
}

bool UserItemIndex::train_positive(std::size_t user, std::size_t item) const {
  return std::binary_search(train_[user].begin(), train_[user].end(), item);
}

std::optional<std::size_t> UserItemIndex::held_out(std::size_t user, Split s) const {
  if (s == Split::validation) return validation_[user];
  if (s == Split::test) return test_[user];
  return std::nullopt;
}

LoadedInteractions parse_interactions(std::string_view text) {
  LoadedInteractions out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t line_no = 0;
  for (std::string_view line : detail::lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("interactions: expected user_id<TAB>item_id[<TAB>rating]", line_no);
    }
    if (fields.size() == 3) detail::parse_real(fields[2], line_no);
    const std::size_t u = out.users.intern(fields[0]);
    const std::size_t i = out.items.intern(fields[1]);
    if (!seen.emplace(u, i).second) {
      ++out.duplicates_skipped;
      continue;
    }
    out.matrix.entries.push_back({u, i, 1.0, Split::unassigned});
  }
  out.matrix.n_users = out.users.size();
  out.matrix.n_items = out.items.size();
  out.matrix.eval_excluded.assign(out.matrix.n_users, false);
  return out;
}

LoadedInteractions load_interactions(const std::filesystem::path& path) {
  return parse_interactions(detail::read_file(path));
}

void save_interactions(const InteractionMatrix& m, const IndexMap& users, const IndexMap& items,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write interactions " + path.string());
  out << "# user_id\titem_id\n";
  for (const auto& e : m.entries) out << users.raw_id(e.user) << '\t' << items.raw_id(e.item) << '\n';
  if (!out) throw IoError("failed writing interactions " + path.string());
}

}  // namespace pretrec
