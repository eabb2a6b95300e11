#include "tfgnn/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string_view>

#include "tfgnn/error.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMeta = "meta";
constexpr const char* kEdges = "edges.tsv";
constexpr const char* kFeaturesTsv = "features.tsv";
constexpr const char* kFeaturesBin = "features.bin";
constexpr const char* kLabels = "labels.tsv";
constexpr const char* kSplit = "split.tsv";

class LineReader {
 public:
  LineReader(const fs::path& dir, const char* file) : file_(file), in_(dir / file) {
    if (!in_) throw ValidationError(file_, 0, "missing or unreadable");
  }

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(file_, line_no_, what);
  }

  std::size_t line_no() const { return line_no_; }
  const std::string& file() const { return file_; }

 private:
  std::string file_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

struct Meta {
  std::size_t nodes = 0;
  std::size_t features = 0;
  std::size_t classes = 0;
  FeatureMode mode = FeatureMode::Tsv;
};

Meta read_meta(const fs::path& dir) {
  LineReader reader(dir, kMeta);
  std::map<std::string, std::string, std::less<>> kv;
  std::string line;
  while (reader.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) reader.fail("expected key=value");
    std::string key = line.substr(0, eq);
    if (key != "nodes" && key != "features" && key != "classes" && key != "feature_mode") {
      reader.fail("unknown key '" + key + "'");
    }
    if (!kv.emplace(key, line.substr(eq + 1)).second) reader.fail("duplicate key '" + key + "'");
  }

  Meta meta;
  auto count = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(kMeta, 0, std::string("missing key '") + key + "'");
    auto v = parse_number<std::size_t>(it->second);
    if (!v) throw ValidationError(kMeta, 0, std::string("key '") + key + "' is not a count");
    return *v;
  };
  meta.nodes = count("nodes");
  meta.features = count("features");
  meta.classes = count("classes");
  if (auto it = kv.find("feature_mode"); it != kv.end()) {
    if (it->second == "tsv") {
      meta.mode = FeatureMode::Tsv;
    } else if (it->second == "raw_f32le") {
      meta.mode = FeatureMode::RawF32Le;
    } else {
      throw ValidationError(kMeta, 0, "feature_mode must be tsv or raw_f32le");
    }
  } else {
    throw ValidationError(kMeta, 0, "missing key 'feature_mode'");
  }
  return meta;
}

Graph read_edges(const fs::path& dir, std::size_t n) {
  LineReader reader(dir, kEdges);
  std::vector<Edge> edges;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) reader.fail("empty line");
    const auto fields = split_tabs(line);
    if (fields.size() != 2) reader.fail("expected two tab-separated node indices");
    auto u = parse_number<NodeId>(fields[0]);
    auto v = parse_number<NodeId>(fields[1]);
    if (!u || !v) reader.fail("node index is not a non-negative integer");
    if (*u >= n || *v >= n) reader.fail("node index out of range");
    if (*u == *v) reader.fail("self-loop");
    if (*u > *v) reader.fail("edge must be written with u < v");
    edges.push_back({*u, *v});
  }
  std::vector<Edge> sorted = edges;
  std::sort(sorted.begin(), sorted.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    const Edge dup = *std::adjacent_find(sorted.begin(), sorted.end());
    throw ValidationError(kEdges, 0,
                          "duplicate edge " + std::to_string(dup.u) + "\t" + std::to_string(dup.v));
  }
  return Graph::build(n, edges);
}

Matrix read_features_tsv(const fs::path& dir, const Meta& meta) {
  LineReader reader(dir, kFeaturesTsv);
  Matrix x(meta.nodes, meta.features);
  std::string line;
  std::size_t row = 0;
  while (reader.next(line)) {
    if (row >= meta.nodes) reader.fail("more rows than meta nodes=" + std::to_string(meta.nodes));
    const auto fields = meta.features == 0 && line.empty() ? std::vector<std::string_view>{}
                                                           : split_tabs(line);
    if (fields.size() != meta.features) {
      reader.fail("expected " + std::to_string(meta.features) + " values, got " +
                  std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto v = parse_number<double>(fields[c]);
      if (!v) reader.fail("column " + std::to_string(c + 1) + " is not a decimal number");
      x(row, c) = *v;
    }
    ++row;
  }
  if (row != meta.nodes) {
    throw ValidationError(kFeaturesTsv, 0,
                          "has " + std::to_string(row) + " rows, meta says " +
                              std::to_string(meta.nodes));
  }
  return x;
}

Matrix read_features_bin(const fs::path& dir, const Meta& meta) {
  std::ifstream in(dir / kFeaturesBin, std::ios::binary);
  if (!in) throw ValidationError(kFeaturesBin, 0, "missing or unreadable");
  const std::size_t count = meta.nodes * meta.features;
  std::vector<std::uint32_t> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 4));
  if (static_cast<std::size_t>(in.gcount()) != count * 4 || in.peek() != EOF) {
    throw ValidationError(kFeaturesBin, 0,
                          "expected exactly " + std::to_string(count * 4) + " bytes");
  }
  Matrix x(meta.nodes, meta.features);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = raw[i];
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    x.data()[i] = static_cast<double>(f);
  }
  return x;
}

std::vector<int> read_labels(const fs::path& dir, const Meta& meta) {
  LineReader reader(dir, kLabels);
  std::vector<int> labels;
  std::string line;
  while (reader.next(line)) {
    if (labels.size() >= meta.nodes) reader.fail("more lines than meta nodes");
    auto y = parse_number<int>(line);
    if (!y) reader.fail("label is not an integer");
    if (*y != kUnknownLabel && (*y < 0 || static_cast<std::size_t>(*y) >= meta.classes)) {
      reader.fail("label " + std::to_string(*y) + " outside [0, " + std::to_string(meta.classes) +
                  ") and not -1");
    }
    labels.push_back(*y);
  }
  if (labels.size() != meta.nodes) {
    throw ValidationError(kLabels, 0,
                          "has " + std::to_string(labels.size()) + " lines, meta says " +
                              std::to_string(meta.nodes));
  }
  return labels;
}

Split read_split(const fs::path& dir, const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  LineReader reader(dir, kSplit);
  Split split{NodeMask(n), NodeMask(n), NodeMask(n)};
  std::string line;
  std::size_t v = 0;
  while (reader.next(line)) {
    if (v >= n) reader.fail("more lines than meta nodes");
    const auto node = static_cast<NodeId>(v);
    if (line == "train") {
      if (labels[v] == kUnknownLabel) reader.fail("train node has label -1");
      split.train.insert(node);
    } else if (line == "val") {
      split.val.insert(node);
    } else if (line == "test") {
      split.test.insert(node);
    } else {
      reader.fail("expected train, val or test");
    }
    ++v;
  }
  if (v != n) {
    throw ValidationError(kSplit, 0,
                          "has " + std::to_string(v) + " lines, meta says " + std::to_string(n));
  }
  return split;
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw ValidationError(path.filename().string(), 0, "cannot open for writing");
  return out;
}

void write_double(std::ostream& out, double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, ptr - buf);
}

}  // namespace

NodeMask Dataset::labelled(const NodeMask& mask) const {
  NodeMask out(mask.size());
  for (NodeId v : mask.indices()) {
    if (labels.at(v) != kUnknownLabel) out.insert(v);
  }
  return out;
}

void Dataset::validate() const {
  const std::size_t n = num_nodes();
  auto fail = [](const std::string& what) { throw ValidationError("dataset", 0, what); };
  if (features.rows() != n) fail("feature rows do not match node count");
  if (labels.size() != n) fail("label count does not match node count");
  if (split.train.size() != n || split.val.size() != n || split.test.size() != n) {
    fail("split masks do not match node count");
  }
  for (NodeId v = 0; v < n; ++v) {
    const int y = labels[v];
    if (y != kUnknownLabel && (y < 0 || static_cast<std::size_t>(y) >= num_classes)) {
      fail("node " + std::to_string(v) + " has label " + std::to_string(y) + " outside [0, " +
           std::to_string(num_classes) + ")");
    }
    const int roles = split.train.contains(v) + split.val.contains(v) + split.test.contains(v);
    if (roles > 1) fail("node " + std::to_string(v) + " is in more than one split");
    if (split.train.contains(v) && y == kUnknownLabel) {
      fail("train node " + std::to_string(v) + " has no label");
    }
  }
}

Dataset load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError(dir.string(), 0, "not a bundle directory");
  const Meta meta = read_meta(dir);
  Dataset ds;
  ds.name = fs::absolute(dir).lexically_normal().filename().string();
  if (ds.name.empty()) ds.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  ds.num_classes = meta.classes;
  ds.feature_mode = meta.mode;
  ds.graph = read_edges(dir, meta.nodes);
  ds.features = meta.mode == FeatureMode::Tsv ? read_features_tsv(dir, meta)
                                              : read_features_bin(dir, meta);
  ds.labels = read_labels(dir, meta);
  ds.split = read_split(dir, ds.labels);
  ds.validate();
  return ds;
}

void save_bundle(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  const std::size_t n = ds.num_nodes();
  for (NodeId v = 0; v < n; ++v) {
    if (!ds.split.train.contains(v) && !ds.split.val.contains(v) && !ds.split.test.contains(v)) {
      throw ValidationError("dataset", 0,
                            "node " + std::to_string(v) + " is in no split; bundles need one");
    }
  }
  fs::create_directories(dir);

  {
    auto out = open_out(dir / kMeta);
    out << "nodes=" << n << "\nfeatures=" << ds.feature_dim() << "\nclasses=" << ds.num_classes
        << "\nfeature_mode=" << (ds.feature_mode == FeatureMode::Tsv ? "tsv" : "raw_f32le")
        << "\n";
  }
  {
    auto out = open_out(dir / kEdges);
    for (const Edge& e : ds.graph.edges()) out << e.u << '\t' << e.v << '\n';
  }
  if (ds.feature_mode == FeatureMode::Tsv) {
    auto out = open_out(dir / kFeaturesTsv);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = ds.features.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << '\t';
        write_double(out, row[c]);
      }
      out << '\n';
    }
  } else {
    auto out = open_out(dir / kFeaturesBin, true);
    for (double x : ds.features.values()) {
      const auto f = static_cast<float>(x);
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  {
    auto out = open_out(dir / kLabels);
    for (int y : ds.labels) out << y << '\n';
  }
  {
    auto out = open_out(dir / kSplit);
    for (NodeId v = 0; v < n; ++v) {
      out << (ds.split.train.contains(v) ? "train" : ds.split.val.contains(v) ? "val" : "test")
          << '\n';
    }
  }
}

Split make_standard_split(std::span<const int> labels, std::size_t num_classes,
                          std::size_t per_class_train, std::size_t val_size, std::uint64_t seed) {
  const std::size_t n = labels.size();
  Rng rng(seed);
  auto shuffle = [&rng](std::vector<NodeId>& nodes) {
    for (std::size_t i = nodes.size(); i > 1; --i) {
      std::swap(nodes[i - 1], nodes[rng.below(i)]);
    }
  };

  std::vector<std::vector<NodeId>> by_class(num_classes);
  for (NodeId v = 0; v < n; ++v) {
    const int y = labels[v];
    if (y == kUnknownLabel) continue;
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw InputError("node " + std::to_string(v) + " has label " + std::to_string(y) +
                       " outside [0, " + std::to_string(num_classes) + ")");
    }
    by_class[static_cast<std::size_t>(y)].push_back(v);
  }

  Split split{NodeMask(n), NodeMask(n), NodeMask(n)};
  std::vector<NodeId> remaining;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& nodes = by_class[c];
    if (nodes.size() < per_class_train) {
      throw InputError("class " + std::to_string(c) + " has " + std::to_string(nodes.size()) +
                       " labelled nodes, need " + std::to_string(per_class_train));
    }
    shuffle(nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i < per_class_train) {
        split.train.insert(nodes[i]);
      } else {
        remaining.push_back(nodes[i]);
      }
    }
  }
  if (remaining.size() < val_size) {
    throw InputError("only " + std::to_string(remaining.size()) +
                     " labelled nodes left for a validation set of " + std::to_string(val_size));
  }
  std::sort(remaining.begin(), remaining.end());
  shuffle(remaining);
  for (std::size_t i = 0; i < val_size; ++i) split.val.insert(remaining[i]);
  for (NodeId v = 0; v < n; ++v) {
    if (!split.train.contains(v) && !split.val.contains(v)) split.test.insert(v);
  }
  return split;
}

}  // namespace tfgnn
