#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pretrec {

enum class Split : std::uint8_t { unassigned, train, validation, test };

std::string_view to_string(Split s) noexcept;

struct Interaction {
  std::size_t user = 0;
  std::size_t item = 0;
  double value = 1.0;
  Split split = Split::unassigned;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Raw string id <-> dense 0-based index, in first-seen order.
class IndexMap {
 public:
  std::size_t intern(std::string_view raw);
  std::optional<std::size_t> find(std::string_view raw) const;
  const std::string& raw_id(std::size_t index) const { return raw_[index]; }
  std::size_t size() const noexcept { return raw_.size(); }

  // TSV `raw_id<TAB>dense_index`.
  void save(const std::filesystem::path& path) const;
  static IndexMap load(const std::filesystem::path& path);
  static IndexMap identity(std::size_t n);

  friend bool operator==(const IndexMap& a, const IndexMap& b) { return a.raw_ == b.raw_; }

 private:
  std::vector<std::string> raw_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Implicit-feedback user x item matrix stored as a coordinate list with split tags.
struct InteractionMatrix {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<Interaction> entries;
  // Users with fewer than three interactions: trained on, never evaluated.
  std::vector<bool> eval_excluded;

  std::size_t count(Split s) const noexcept;
  // Throws DataError on out-of-range indices or duplicate pairs.
  void validate() const;

  friend bool operator==(const InteractionMatrix&, const InteractionMatrix&) = default;
};

// Per-user sorted item lists derived from an InteractionMatrix.
class UserItemIndex {
 public:
  explicit UserItemIndex(const InteractionMatrix& m);

  std::span<const std::size_t> all_items(std::size_t user) const { return all_[user]; }
  std::span<const std::size_t> train_items(std::size_t user) const { return train_[user]; }
  bool interacted(std::size_t user, std::size_t item) const;
  bool train_positive(std::size_t user, std::size_t item) const;
  std::optional<std::size_t> held_out(std::size_t user, Split s) const;
  std::size_t n_users() const noexcept { return all_.size(); }
  std::size_t n_items() const noexcept { return n_items_; }

 private:
  std::size_t n_items_ = 0;
  std::vector<std::vector<std::size_t>> all_;
  std::vector<std::vector<std::size_t>> train_;
  std::vector<std::optional<std::size_t>> validation_;
  std::vector<std::optional<std::size_t>> test_;
};

struct LoadedInteractions {
  InteractionMatrix matrix;
  IndexMap users;
  IndexMap items;
  std::size_t duplicates_skipped = 0;
};

// Reads `user_id<TAB>item_id[<TAB>rating]` lines ('#' lines ignored). Every observed entry is
// stored with value 1. Duplicate pairs keep the first occurrence and are counted.
LoadedInteractions load_interactions(const std::filesystem::path& path);
LoadedInteractions parse_interactions(std::string_view text);

void save_interactions(const InteractionMatrix& m, const IndexMap& users, const IndexMap& items,
                       const std::filesystem::path& path);

}  // namespace pretrec
