#include "gbd/generators.hpp"
#include "gbd/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gbd {

namespace {

// One `key values...` line per entry; `cut` and `term KIND` open nested
// blocks closed by `end`.
struct Block {
  std::string tag;
  std::vector<std::string> args;
  std::map<std::string, std::vector<std::string>> keys;
  std::vector<Block> children;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(std::istream& in) {
    std::string raw;
    int n = 0;
    while (std::getline(in, raw)) {
      ++n;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      auto tokens = split_ws(raw);
      if (!tokens.empty()) lines_.push_back({n, std::move(tokens)});
    }
  }

  Block parse() {
    Block top;
    top.tag = "field";
    parse_into(top, false);
    return top;
  }

 private:
  struct Line {
    int number;
    std::vector<std::string> tokens;
  };

  void parse_into(Block& block, bool nested) {
    while (pos_ < lines_.size()) {
      const Line& ln = lines_[pos_++];
      const std::string& key = ln.tokens[0];
      std::vector<std::string> rest(ln.tokens.begin() + 1, ln.tokens.end());
      if (key == "end") {
        if (!nested) fail(ln.number, "unexpected 'end'");
        return;
      }
      if (key == "cut" || key == "term") {
        Block child;
        child.tag = key;
        child.args = std::move(rest);
        child.line = ln.number;
        parse_into(child, true);
        block.children.push_back(std::move(child));
        continue;
      }
      if (block.keys.count(key)) fail(ln.number, "duplicate key '" + key + "'");
      block.keys[key] = std::move(rest);
    }
    if (nested) fail(block.line, "block '" + block.tag + "' is missing 'end'");
  }

  [[noreturn]] static void fail(int line, const std::string& msg) {
    throw std::invalid_argument("field descriptor line " + std::to_string(line) + ": " + msg);
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  Reader(const Block& b, int d) : block_(b), d_(d) {}

  bool has(const std::string& key) const { return block_.keys.count(key) != 0; }

  const std::vector<std::string>& tokens(const std::string& key) const {
    auto it = block_.keys.find(key);
    if (it == block_.keys.end()) throw std::invalid_argument("field descriptor: missing key '" + key + "'");
    used_.push_back(key);
    return it->second;
  }

  double scalar(const std::string& key) const {
    const auto& t = tokens(key);
    if (t.size() != 1) throw std::invalid_argument("field descriptor: '" + key + "' expects one value");
    return parse_double(t[0]);
  }

  Vec vec(const std::string& key, bool optional_zero = false) const {
    if (optional_zero && !has(key)) return Vec::Zero(d_);
    const auto& t = tokens(key);
    if (static_cast<int>(t.size()) != d_)
      throw std::invalid_argument("field descriptor: '" + key + "' expects " + std::to_string(d_) + " values");
    Vec v(d_);
    for (int i = 0; i < d_; ++i) v(i) = parse_double(t[i]);
    return v;
  }

  Mat mat(const std::string& key) const {
    const auto& t = tokens(key);
    if (static_cast<int>(t.size()) != d_ * d_)
      throw std::invalid_argument("field descriptor: '" + key + "' expects " + std::to_string(d_ * d_) +
                                  " values (row-major)");
    Mat m(d_, d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) m(i, j) = parse_double(t[i * d_ + j]);
    return m;
  }

  void finish(std::initializer_list<const char*> ignored = {}) const {
    for (const auto& [key, _] : block_.keys) {
      bool ok = std::find(used_.begin(), used_.end(), key) != used_.end();
      for (const char* ig : ignored) ok = ok || key == ig;
      if (!ok) throw std::invalid_argument("field descriptor: unknown key '" + key + "'");
    }
  }

 private:
  const Block& block_;
  int d_;
  mutable std::vector<std::string> used_;
};

Component read_component(const std::string& kind, const Block& b, int d) {
  Reader r(b, d);
  Component c;
  if (kind == "rigid") {
    c = RigidMotion{r.mat("skew"), r.vec("offset", true)};
  } else if (kind == "linear") {
    c = LinearMap{r.mat("gradient"), r.vec("offset", true)};
  } else if (kind == "scalar_jump") {
    c = ScalarJump{r.vec("normal"), r.scalar("level"), r.vec("jump")};
  } else if (kind == "piecewise_rigid") {
    PiecewiseRigid pr{RigidMotion{r.has("skew") ? r.mat("skew") : Mat::Zero(d, d), r.vec("offset", true)}, {}};
    for (const Block& child : b.children) {
      if (child.tag != "cut") throw std::invalid_argument("field descriptor: piecewise_rigid accepts only 'cut' blocks");
      Reader cr(child, d);
      pr.cuts.push_back(Cut{cr.vec("normal"), cr.scalar("level"), cr.mat("skew"), cr.vec("offset", true)});
      cr.finish();
    }
    if (pr.cuts.empty()) throw std::invalid_argument("field descriptor: piecewise_rigid needs at least one cut");
    c = std::move(pr);
  } else {
    throw std::invalid_argument("field descriptor: unknown kind '" + kind + "'");
  }
  if (kind != "piecewise_rigid" && !b.children.empty())
    throw std::invalid_argument("field descriptor: kind '" + kind + "' takes no nested blocks");
  r.finish({"kind", "name", "dim", "lower", "upper"});
  return c;
}

void write_component(std::ostream& out, const Component& c, const std::string& indent) {
  auto mat = [](const Mat& m) {
    std::string s;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) s += (s.empty() ? "" : " ") + format_double(m(i, j));
    return s;
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, RigidMotion>) {
          out << indent << "skew " << mat(x.skew) << "\n" << indent << "offset " << format_vec(x.offset) << "\n";
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          out << indent << "gradient " << mat(x.gradient) << "\n" << indent << "offset " << format_vec(x.offset) << "\n";
        } else if constexpr (std::is_same_v<T, ScalarJump>) {
          out << indent << "normal " << format_vec(x.normal) << "\n"
              << indent << "level " << format_double(x.level) << "\n"
              << indent << "jump " << format_vec(x.jump) << "\n";
        } else {
          out << indent << "skew " << mat(x.base.skew) << "\n" << indent << "offset " << format_vec(x.base.offset) << "\n";
          for (const Cut& cut : x.cuts) {
            out << indent << "cut\n"
                << indent << "  normal " << format_vec(cut.normal) << "\n"
                << indent << "  level " << format_double(cut.level) << "\n"
                << indent << "  skew " << mat(cut.skew) << "\n"
                << indent << "  offset " << format_vec(cut.offset) << "\n"
                << indent << "end\n";
          }
        }
      },
      c);
}

std::string component_kind(const Component& c) {
  static const char* names[] = {"rigid", "linear", "piecewise_rigid", "scalar_jump"};
  return names[c.index()];
}

}  // namespace

GeneratorSpec parse_field_spec(std::istream& in) {
  const Block top = Parser(in).parse();
  auto need = [&](const std::string& key) -> const std::vector<std::string>& {
    auto it = top.keys.find(key);
    if (it == top.keys.end()) throw std::invalid_argument("field descriptor: missing key '" + key + "'");
    return it->second;
  };
  const auto& dim_tok = need("dim");
  if (dim_tok.size() != 1) throw std::invalid_argument("field descriptor: 'dim' expects one value");
  const double dim_raw = parse_double(dim_tok[0]);
  const int d = static_cast<int>(dim_raw);
  if (d != dim_raw || d < 2 || d > kMaxDim) throw std::invalid_argument("field descriptor: dim must be an integer in [2, 4]");

  Reader r(top, d);
  BoxDomain domain(r.vec("lower"), r.vec("upper"));
  const auto& kind_tok = need("kind");
  if (kind_tok.size() != 1) throw std::invalid_argument("field descriptor: 'kind' expects one value");
  const std::string kind = kind_tok[0];
  std::string name;
  if (auto it = top.keys.find("name"); it != top.keys.end() && !it->second.empty()) name = it->second[0];

  GeneratorSpec spec{name, domain, RigidMotion{}};
  if (kind == "custom-sum" || kind == "sum") {
    Sum sum;
    for (const Block& child : top.children) {
      if (child.tag != "term" || child.args.size() != 1)
        throw std::invalid_argument("field descriptor: sum accepts only 'term KIND' blocks");
      sum.terms.push_back(read_component(child.args[0], child, d));
    }
    if (sum.terms.empty()) throw std::invalid_argument("field descriptor: sum needs at least one term");
    for (const auto& [key, _] : top.keys)
      if (key != "name" && key != "dim" && key != "lower" && key != "upper" && key != "kind")
        throw std::invalid_argument("field descriptor: unknown key '" + key + "'");
    spec.shape = std::move(sum);
  } else {
    std::visit([&](auto&& c) { spec.shape = std::move(c); }, read_component(kind, top, d));
  }
  exact_structure(spec);  // validate
  return spec;
}

GeneratorSpec read_field_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field descriptor '" + path + "'");
  GeneratorSpec spec = parse_field_spec(in);
  return spec;
}

void write_field_spec(std::ostream& out, const GeneratorSpec& spec) {
  out << "# gbd field descriptor v1\n";
  if (!spec.name.empty()) out << "name " << spec.name << "\n";
  out << "dim " << spec.dim() << "\n"
      << "lower " << format_vec(spec.domain.lower()) << "\n"
      << "upper " << format_vec(spec.domain.upper()) << "\n"
      << "kind " << to_string(spec.kind()) << "\n";
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Sum>) {
          for (const Component& c : x.terms) {
            out << "term " << component_kind(c) << "\n";
            write_component(out, c, "  ");
            out << "end\n";
          }
        } else {
          write_component(out, Component{x}, "");
        }
      },
      spec.shape);
}

std::string format_field_spec(const GeneratorSpec& spec) {
  std::ostringstream os;
  write_field_spec(os, spec);
  return os.str();
}

}  // namespace gbd
