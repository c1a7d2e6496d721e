#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

// Pre-trained user/item embeddings plus the biases learned alongside them.
struct EmbeddingSet {
  Tensor2 users;
  Tensor2 items;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::string model;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::size_t dim() const noexcept { return users.cols(); }
  // Throws NumericError on non-finite values, ConfigError on inconsistent shapes.
  void validate() const;
};

enum class EmbeddingSide : std::uint8_t { user, item };

struct EmbeddingTable {
  EmbeddingSide side = EmbeddingSide::user;
  Tensor2 values;
  std::uint64_t seed = 0;
  std::string model;
};

// `#pretrained<TAB>side=..<TAB>n=..<TAB>d=..<TAB>seed=..<TAB>model=..`, then
// `index<TAB>v1 .. vd` per entity at 17 significant digits.
void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path);
// FormatError (with the line number) on a bad header, row length or index.
EmbeddingTable load_embedding_table(const std::filesystem::path& path);
EmbeddingTable parse_embedding_table(std::string_view text);

inline constexpr const char* kUserEmbeddingFile = "user_embeddings.tsv";
inline constexpr const char* kItemEmbeddingFile = "item_embeddings.tsv";

// Writes both tables into `dir`. Biases are not persisted.
void save_embeddings(const EmbeddingSet& emb, const std::filesystem::path& dir);
// Loads both tables from `dir`; biases come back as zeros.
EmbeddingSet load_embeddings(const std::filesystem::path& dir);

}  // namespace pretrec
