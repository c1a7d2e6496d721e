#include "pretrec/pretrain/embedding_set.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "pretrec/error.hpp"
#include "text_util.hpp"

namespace pretrec {

void EmbeddingSet::validate() const {
  if (users.cols() != items.cols()) throw ConfigError("EmbeddingSet: user and item dimensions differ");
  if (user_bias.size() != users.rows() || item_bias.size() != items.rows())
    throw ConfigError("EmbeddingSet: bias length does not match the entity count");
  if (!users.all_finite() || !items.all_finite()) throw NumericError("EmbeddingSet: non-finite embedding");
  for (double b : user_bias)
    if (!std::isfinite(b)) throw NumericError("EmbeddingSet: non-finite user bias");
  for (double b : item_bias)
    if (!std::isfinite(b)) throw NumericError("EmbeddingSet: non-finite item bias");
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "#pretrained\tside=" << (table.side == EmbeddingSide::user ? "user" : "item")
      << "\tn=" << table.values.rows() << "\td=" << table.values.cols() << "\tseed=" << table.seed
      << "\tmodel=" << table.model << '\n';
  for (std::size_t r = 0; r < table.values.rows(); ++r) {
    out << r;
    for (double v : table.values.row(r)) out << '\t' << detail::format_real17(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

FormatError format_error(const std::string& what, std::size_t line_no) {
  return FormatError("embedding file line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

EmbeddingTable parse_embedding_table(std::string_view text) {
  const auto rows = detail::lines(text);
  if (rows.empty() || !rows[0].starts_with("#pretrained")) throw format_error("missing #pretrained header", 1);
  std::map<std::string, std::string, std::less<>> fields;
  const auto header = detail::split(rows[0], '\t');
  for (std::size_t f = 1; f < header.size(); ++f) {
    const auto eq = header[f].find('=');
    if (eq == std::string_view::npos) throw format_error("malformed header field '" + std::string(header[f]) + "'", 1);
    fields[std::string(header[f].substr(0, eq))] = std::string(header[f].substr(eq + 1));
  }
  for (const char* key : {"side", "n", "d", "seed", "model"})
    if (!fields.contains(key)) throw format_error(std::string("header lacks '") + key + "'", 1);

  EmbeddingTable t;
  if (fields["side"] == "user") {
    t.side = EmbeddingSide::user;
  } else if (fields["side"] == "item") {
    t.side = EmbeddingSide::item;
  } else {
    throw format_error("side must be user or item", 1);
  }
  std::size_t n = 0, d = 0;
  try {
    n = detail::parse_index(fields["n"], 1);
    d = detail::parse_index(fields["d"], 1);
    t.seed = detail::parse_index(fields["seed"], 1);
  } catch (const ParseError& e) {
    throw format_error(e.what(), 1);
  }
  t.model = fields["model"];
  t.values = Tensor2(n, d);

  std::vector<bool> seen(n, false);
  std::size_t count = 0;
  for (std::size_t l = 1; l < rows.size(); ++l) {
    const std::size_t line_no = l + 1;
    if (detail::trim(rows[l]).empty()) continue;
    const auto cells = detail::split(rows[l], '\t');
    if (cells.size() != d + 1) {
      throw format_error("expected " + std::to_string(d + 1) + " columns, got " + std::to_string(cells.size()),
                         line_no);
    }
    try {
      const std::size_t idx = detail::parse_index(cells[0], line_no);
      if (idx >= n || seen[idx]) throw format_error("bad or repeated index " + std::to_string(idx), line_no);
      seen[idx] = true;
      for (std::size_t k = 0; k < d; ++k) t.values(idx, k) = detail::parse_real(cells[k + 1], line_no);
    } catch (const ParseError& e) {
      throw format_error(e.what(), line_no);
    }
    ++count;
  }
  if (count != n) throw format_error("expected " + std::to_string(n) + " rows, got " + std::to_string(count), rows.size());
  return t;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  return parse_embedding_table(detail::read_file(path));
}

void save_embeddings(const EmbeddingSet& emb, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_embedding_table({EmbeddingSide::user, emb.users, emb.seed, emb.model}, dir / kUserEmbeddingFile);
  save_embedding_table({EmbeddingSide::item, emb.items, emb.seed, emb.model}, dir / kItemEmbeddingFile);
}

EmbeddingSet load_embeddings(const std::filesystem::path& dir) {
  auto users = load_embedding_table(dir / kUserEmbeddingFile);
  auto items = load_embedding_table(dir / kItemEmbeddingFile);
  if (users.side != EmbeddingSide::user || items.side != EmbeddingSide::item)
    throw FormatError("embedding files in " + dir.string() + " have swapped sides");
  if (users.values.cols() != items.values.cols())
    throw FormatError("user and item embedding dimensions differ in " + dir.string());
  EmbeddingSet emb;
  emb.user_bias.assign(users.values.rows(), 0.0);
  emb.item_bias.assign(items.values.rows(), 0.0);
  emb.users = std::move(users.values);
  emb.items = std::move(items.values);
  emb.model = users.model;
  emb.seed = users.seed;
  return emb;
}

}  // namespace pretrec
