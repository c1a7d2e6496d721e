#include "pretrec/data/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pretrec/error.hpp"
#include "text_util.hpp"

namespace pretrec {

void FeatureMatrix::infer_kinds() {
  kinds.resize(feature_count(), ColumnKind::binary);
  for (std::size_t c = 0; c < feature_count(); ++c) {
    if (kinds[c] == ColumnKind::categorical_onehot) continue;
    bool binary = true;
    for (std::size_t e = 0; e < entity_count() && binary; ++e) {
      const double v = values(e, c);
      binary = v == 0.0 || v == 1.0;
    }
    kinds[c] = binary ? ColumnKind::binary : ColumnKind::real;
  }
}

void FeatureMatrix::categorize_column(std::size_t col, double bin_width, std::size_t bin_count) {
  if (col >= feature_count()) throw ConfigError("categorize_column: column out of range");
  std::vector<double> column(entity_count());
  for (std::size_t e = 0; e < entity_count(); ++e) column[e] = values(e, col);
  const Tensor2 buckets = categorize_real_feature(column, bin_width, bin_count);

  const std::size_t new_cols = feature_count() - 1 + bin_count;
  Tensor2 next(entity_count(), new_cols);
  std::vector<ColumnKind> next_kinds;
  next_kinds.reserve(new_cols);
  for (std::size_t c = 0; c < feature_count(); ++c) {
    if (c == col) {
      for (std::size_t b = 0; b < bin_count; ++b) next_kinds.push_back(ColumnKind::categorical_onehot);
    } else {
      next_kinds.push_back(kinds[c]);
    }
  }
  for (std::size_t e = 0; e < entity_count(); ++e) {
    std::size_t out = 0;
    for (std::size_t c = 0; c < feature_count(); ++c) {
      if (c == col) {
        for (std::size_t b = 0; b < bin_count; ++b) next(e, out++) = buckets(e, b);
      } else {
        next(e, out++) = values(e, c);
      }
    }
  }
  values = std::move(next);
  kinds = std::move(next_kinds);
}

LoadedFeatures parse_features(std::string_view text, const IndexMap& ids, std::size_t entity_count) {
  const auto all_lines = detail::lines(text);
  std::size_t line_no = 0;
  std::optional<std::size_t> k;
  LoadedFeatures out;
  std::vector<bool> seen(entity_count, false);
  for (std::string_view line : all_lines) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!k && line.starts_with("#k=")) {
        k = detail::parse_index(detail::trim(line.substr(3)), line_no);
        out.features = FeatureMatrix(entity_count, *k);
      }
      continue;
    }
    if (!k) throw ParseError("features: missing '#k=<feature-count>' header", line_no);
    const auto fields = detail::split(line, '\t');
    if (fields.size() > 2 || fields[0].empty()) {
      throw ParseError("features: expected entity_id<TAB>f:v[ f:v ...]", line_no);
    }
    const auto entity = ids.find(fields[0]);
    if (!entity || *entity >= entity_count) {
      ++out.unresolved_ids;
      continue;
    }
    seen[*entity] = true;
    if (fields.size() == 1) continue;
    for (std::string_view pair : detail::split(detail::trim(fields[1]), ' ')) {
      if (pair.empty()) continue;
      const auto colon = pair.find(':');
      if (colon == std::string_view::npos) throw ParseError("features: expected f:v, got '" + std::string(pair) + "'", line_no);
      const std::size_t f = detail::parse_index(pair.substr(0, colon), line_no);
      const double v = detail::parse_real(pair.substr(colon + 1), line_no);
      if (f >= *k) {
        throw ParseError("features: index " + std::to_string(f) + " outside declared k=" + std::to_string(*k), line_no);
      }
      if (v < 0.0 || !std::isfinite(v)) throw ParseError("features: values must be finite and non-negative", line_no);
      out.features.values(*entity, f) = v;
    }
  }
  if (!k) throw ParseError("features: missing '#k=<feature-count>' header", 0);
  out.features.infer_kinds();
  for (std::size_t e = 0; e < entity_count; ++e) {
    const auto row = out.features.row(e);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) ++out.zero_rows;
  }
  return out;
}

LoadedFeatures load_features(const std::filesystem::path& path, const IndexMap& ids,
                             std::size_t entity_count) {
  return parse_features(detail::read_file(path), ids, entity_count);
}

void save_features(const FeatureMatrix& f, const IndexMap& ids, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write features " + path.string());
  out << "#k=" << f.feature_count() << '\n';
  for (std::size_t e = 0; e < f.entity_count(); ++e) {
    out << ids.raw_id(e) << '\t';
    bool first = true;
    for (std::size_t c = 0; c < f.feature_count(); ++c) {
      const double v = f.values(e, c);
      if (v == 0.0) continue;
      if (!first) out << ' ';
      out << c << ':' << detail::format_real17(v);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing features " + path.string());
}

Tensor2 categorize_real_feature(std::span<const double> values, double bin_width,
                                std::size_t bin_count) {
  if (!(bin_width > 0.0)) throw ConfigError("categorize_real_feature: bin width must be positive");
  if (bin_count == 0) throw ConfigError("categorize_real_feature: bin count must be >= 1");
  Tensor2 out(values.size(), bin_count);
  for (std::size_t e = 0; e < values.size(); ++e) {
    const double v = values[e];
    if (v < 0.0 || !std::isfinite(v)) {
      throw DataError("categorize_real_feature: value " + std::to_string(v) + " for entity " +
                      std::to_string(e) + " is negative or non-finite");
    }
    const double bucket = std::floor(v / bin_width);
    const std::size_t b =
        bucket >= static_cast<double>(bin_count - 1) ? bin_count - 1 : static_cast<std::size_t>(bucket);
    out(e, b) = 1.0;
  }
  return out;
}

}  // namespace pretrec
