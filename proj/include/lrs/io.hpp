#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/lrs_core.hpp"
#include "lrs/leakfree_oracle.hpp"
#include "lrs/refresh.hpp"

namespace lrs {

// Text formats. All of them are line-oriented ASCII:
//   - the first line is a header `<magic> v1 p=<p> n=<n>`,
//   - blank lines and lines starting with `#` are ignored,
//   - everything the writers emit is byte-deterministic.
//
//   lrs-vec v1     one decimal coordinate per line, n lines
//   lrs-oracle v1  A, A~, B, B~ as 4n coordinate lines in that order
//   lrs-views v1   scalars as key=value lines, vectors as `<name> c1 .. cn`

namespace detail {

// Shortest round-trip decimal form; to_chars makes the bytes reproducible.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline u64 parse_u64(std::string_view token, std::size_t line, std::size_t col) {
  u64 value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw ParseError("expected an unsigned integer, got '" + std::string(token) + "'", line, col);
  return value;
}

// `key=<u64>` with the exact expected key.
inline u64 parse_kv_u64(std::string_view token, std::string_view key, std::size_t line,
                        std::size_t col) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
      token[key.size()] != '=')
    throw ParseError("expected " + std::string(key) + "=<integer>, got '" + std::string(token) +
                         "'",
                     line, col);
  return parse_u64(token.substr(key.size() + 1), line, col + key.size() + 1);
}

// Splits on runs of spaces/tabs; returns (token, 1-based column) pairs.
inline std::vector<std::pair<std::string_view, std::size_t>> split_tokens(std::string_view s) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == ' ' || s[i] == '\t' || s[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    out.emplace_back(s.substr(start, i - start), start + 1);
  }
  return out;
}

// Line source with 1-based position tracking; yields raw lines.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& out) {
    if (!std::getline(in_, out)) return false;
    ++line_no_;
    return true;
  }

  // Next line that is neither blank nor a comment; false at end of input.
  bool next_content(std::string& out) {
    while (next(out)) {
      std::string_view t = trim(out);
      if (t.empty() || t.front() == '#') continue;
      out = std::string(t);
      return true;
    }
    return false;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

struct Header {
  u64 p = 0;
  std::size_t n = 0;
};

inline Header read_header(LineReader& lr, std::string_view magic) {
  std::string line;
  if (!lr.next_content(line))
    throw ParseError("missing header '" + std::string(magic) + " v1 p=<p> n=<n>'", 1, 1);
  auto tokens = split_tokens(line);
  if (tokens.size() != 4 || tokens[0].first != magic || tokens[1].first != "v1")
    throw ParseError("expected header '" + std::string(magic) + " v1 p=<p> n=<n>'", lr.line_no(),
                     tokens.empty() ? 1 : tokens[0].second);
  Header h;
  h.p = parse_kv_u64(tokens[2].first, "p", lr.line_no(), tokens[2].second);
  h.n = static_cast<std::size_t>(parse_kv_u64(tokens[3].first, "n", lr.line_no(), tokens[3].second));
  return h;
}

// Reads `count` coordinate lines (single decimal per line), range-checked
// against p.
inline std::vector<u64> read_coordinates(LineReader& lr, std::size_t count, u64 p) {
  std::vector<u64> values;
  values.reserve(count);
  std::string line;
  while (values.size() < count) {
    if (!lr.next_content(line))
      throw ParseError("unexpected end of input: expected " + std::to_string(count) +
                           " coordinates, got " + std::to_string(values.size()),
                       lr.line_no() + 1, 1);
    auto tokens = split_tokens(line);
    if (tokens.size() != 1)
      throw ParseError("expected exactly one coordinate on the line", lr.line_no(),
                       tokens.size() > 1 ? tokens[1].second : 1);
    u64 v = parse_u64(tokens[0].first, lr.line_no(), tokens[0].second);
    if (v >= p)
      throw ParseError("coordinate " + std::to_string(v) + " out of range for p=" +
                           std::to_string(p),
                       lr.line_no(), tokens[0].second);
    values.push_back(v);
  }
  return values;
}

inline void require_no_trailing_content(LineReader& lr) {
  std::string line;
  if (lr.next_content(line))
    throw ParseError("trailing content '" + line + "'", lr.line_no(), 1);
}

inline void write_coordinates(std::ostream& os, const FieldVector& v) {
  for (const auto& c : v.coords) os << c.value << "\n";
}

inline void write_vector_line(std::ostream& os, std::string_view name, const FieldVector& v) {
  os << name;
  for (const auto& c : v.coords) os << " " << c.value;
  os << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// lrs-vec v1
// ---------------------------------------------------------------------------

struct VectorFile {
  u64 p = 0;
  std::size_t n = 0;
  FieldVector vec;
};

inline void write_vector(std::ostream& os, const FieldVector& v, u64 p) {
  os << "lrs-vec v1 p=" << p << " n=" << v.size() << "\n";
  detail::write_coordinates(os, v);
}

inline VectorFile read_vector(std::istream& in) {
  detail::LineReader lr(in);
  detail::Header h = detail::read_header(lr, "lrs-vec");
  std::vector<u64> values = detail::read_coordinates(lr, h.n, h.p);
  detail::require_no_trailing_content(lr);
  VectorFile out;
  out.p = h.p;
  out.n = h.n;
  out.vec.coords.reserve(values.size());
  for (u64 v : values) out.vec.coords.push_back({v, h.p});
  return out;
}

// ---------------------------------------------------------------------------
// lrs-oracle v1
// ---------------------------------------------------------------------------

inline void write_oracle_sample(std::ostream& os, const OracleSample& s) {
  os << "lrs-oracle v1 p=" << s.params.p << " n=" << s.params.n << "\n";
  os << "# A\n";
  detail::write_coordinates(os, s.A.vec());
  os << "# A_tilde\n";
  detail::write_coordinates(os, s.A_tilde);
  os << "# B\n";
  detail::write_coordinates(os, s.B);
  os << "# B_tilde\n";
  detail::write_coordinates(os, s.B_tilde.vec());
}

// Reads and validates one oracle sample; the C1-C3 constraints are enforced
// here so a hand-written file that violates them is rejected at load time.
inline OracleSample read_oracle_sample(std::istream& in, const FieldParams& params) {
  detail::LineReader lr(in);
  detail::Header h = detail::read_header(lr, "lrs-oracle");
  if (h.p != params.p || h.n != params.n)
    throw ConfigError("oracle file is for p=" + std::to_string(h.p) + ", n=" +
                      std::to_string(h.n) + " but the run uses p=" + std::to_string(params.p) +
                      ", n=" + std::to_string(params.n));
  Field f(params);
  auto read_vec = [&] { return f.vector_from(detail::read_coordinates(lr, h.n, h.p)); };
  FieldVector a = read_vec();
  FieldVector a_tilde = read_vec();
  FieldVector b = read_vec();
  FieldVector b_tilde = read_vec();
  detail::require_no_trailing_content(lr);
  if (has_zero_coordinate(a)) throw DomainError("oracle file: A has a zero coordinate");
  if (has_zero_coordinate(b_tilde)) throw DomainError("oracle file: B_tilde has a zero coordinate");
  OracleSample s{NonZeroVector(std::move(a)), std::move(a_tilde), std::move(b),
                 NonZeroVector(std::move(b_tilde)), params};
  if (!verify(s))
    throw DomainError("oracle file: <A,B> + <A_tilde,B_tilde> != 0");
  return s;
}

// ---------------------------------------------------------------------------
// lrs-views v1
// ---------------------------------------------------------------------------

// Both parties' views of one accepted run plus the fresh shares; written by
// the protocol (restarts, message count, alpha) and by the reconstructor
// (zero messages). V and V~ are stored once; they are identical in both views.
struct ViewsRecord {
  u64 p = 0;
  std::size_t n = 0;
  u64 restarts = 0;
  u64 messages = 0;
  u64 alpha = 0;
  ViewL view_l;
  ViewR view_r;
  NonZeroVector l_prime;
  NonZeroVector r_prime;

  friend bool operator==(const ViewsRecord&, const ViewsRecord&) = default;
};

inline ViewsRecord views_record_from_trace(const RefreshTrace& trace) {
  ViewsRecord rec;
  rec.p = trace.output.params.p;
  rec.n = trace.output.params.n;
  rec.restarts = trace.restarts;
  rec.messages = trace.messages.size();
  rec.alpha = trace.alpha.value;
  rec.view_l = trace.view_l;
  rec.view_r = trace.view_r;
  rec.l_prime = trace.output.L;
  rec.r_prime = trace.output.R;
  return rec;
}

inline ViewsRecord views_record_from_reconstruction(const ViewL& view_l, const ViewR& view_r,
                                                    const Encoding& fresh) {
  ViewsRecord rec;
  rec.p = fresh.params.p;
  rec.n = fresh.params.n;
  rec.restarts = 0;
  rec.messages = 0;
  Field f(fresh.params);
  rec.alpha = f.inner_product(view_l.A.vec(), view_r.B).value;
  rec.view_l = view_l;
  rec.view_r = view_r;
  rec.l_prime = fresh.L;
  rec.r_prime = fresh.R;
  return rec;
}

inline void write_views(std::ostream& os, const ViewsRecord& rec) {
  if (rec.view_l.V != rec.view_r.V || rec.view_l.V_tilde != rec.view_r.V_tilde)
    throw PreconditionError("views disagree on V or V_tilde; refusing to serialize");
  os << "lrs-views v1 p=" << rec.p << " n=" << rec.n << "\n";
  os << "restarts=" << rec.restarts << "\n";
  os << "messages=" << rec.messages << "\n";
  os << "alpha=" << rec.alpha << "\n";
  detail::write_vector_line(os, "L", rec.view_l.L.vec());
  detail::write_vector_line(os, "A", rec.view_l.A.vec());
  detail::write_vector_line(os, "V", rec.view_l.V);
  detail::write_vector_line(os, "A_tilde", rec.view_l.A_tilde);
  detail::write_vector_line(os, "V_tilde", rec.view_l.V_tilde);
  detail::write_vector_line(os, "R", rec.view_r.R.vec());
  detail::write_vector_line(os, "B", rec.view_r.B);
  detail::write_vector_line(os, "B_tilde", rec.view_r.B_tilde.vec());
  detail::write_vector_line(os, "L_prime", rec.l_prime.vec());
  detail::write_vector_line(os, "R_prime", rec.r_prime.vec());
}

inline ViewsRecord read_views(std::istream& in) {
  detail::LineReader lr(in);
  detail::Header h = detail::read_header(lr, "lrs-views");
  ViewsRecord rec;
  rec.p = h.p;
  rec.n = h.n;

  std::string line;
  auto read_scalar = [&](std::string_view key) {
    if (!lr.next_content(line))
      throw ParseError("unexpected end of input: expected " + std::string(key) + "=<integer>",
                       lr.line_no() + 1, 1);
    auto tokens = detail::split_tokens(line);
    if (tokens.size() != 1)
      throw ParseError("expected a single key=value token", lr.line_no(), 1);
    return detail::parse_kv_u64(tokens[0].first, key, lr.line_no(), tokens[0].second);
  };
  rec.restarts = read_scalar("restarts");
  rec.messages = read_scalar("messages");
  rec.alpha = read_scalar("alpha");

  auto read_named_vector = [&](std::string_view name) {
    if (!lr.next_content(line))
      throw ParseError("unexpected end of input: expected vector '" + std::string(name) + "'",
                       lr.line_no() + 1, 1);
    auto tokens = detail::split_tokens(line);
    if (tokens.empty() || tokens[0].first != name)
      throw ParseError("expected vector '" + std::string(name) + "'", lr.line_no(),
                       tokens.empty() ? 1 : tokens[0].second);
    if (tokens.size() != h.n + 1)
      throw ParseError("vector '" + std::string(name) + "' must have " + std::to_string(h.n) +
                           " coordinates",
                       lr.line_no(), tokens.back().second);
    FieldVector v;
    v.coords.reserve(h.n);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      u64 val = detail::parse_u64(tokens[i].first, lr.line_no(), tokens[i].second);
      if (val >= h.p)
        throw ParseError("coordinate " + std::to_string(val) + " out of range for p=" +
                             std::to_string(h.p),
                         lr.line_no(), tokens[i].second);
      v.coords.push_back({val, h.p});
    }
    return v;
  };

  FieldVector l = read_named_vector("L");
  FieldVector a = read_named_vector("A");
  FieldVector v = read_named_vector("V");
  FieldVector a_tilde = read_named_vector("A_tilde");
  FieldVector v_tilde = read_named_vector("V_tilde");
  FieldVector r = read_named_vector("R");
  FieldVector b = read_named_vector("B");
  FieldVector b_tilde = read_named_vector("B_tilde");
  FieldVector l_prime = read_named_vector("L_prime");
  FieldVector r_prime = read_named_vector("R_prime");
  detail::require_no_trailing_content(lr);

  rec.view_l = ViewL{NonZeroVector(l), NonZeroVector(a), v, a_tilde, v_tilde};
  rec.view_r = ViewR{NonZeroVector(r), b, v, NonZeroVector(b_tilde), v_tilde};
  rec.l_prime = NonZeroVector(l_prime);
  rec.r_prime = NonZeroVector(r_prime);
  return rec;
}

// ---------------------------------------------------------------------------
// File helpers and the key=value report writer.
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

// Streams `key=value` lines. Doubles use the shortest round-trip form, so a
// report's bytes depend only on the values.
class KvWriter {
 public:
  explicit KvWriter(std::ostream& os) : os_(os) {}

  KvWriter& kv(std::string_view key, const std::string& value) {
    os_ << key << "=" << value << "\n";
    return *this;
  }
  KvWriter& kv(std::string_view key, const char* value) { return kv(key, std::string(value)); }
  KvWriter& kv(std::string_view key, u64 value) { return kv(key, std::to_string(value)); }
  KvWriter& kv(std::string_view key, int value) { return kv(key, std::to_string(value)); }
  KvWriter& kv(std::string_view key, bool value) { return kv(key, value ? "1" : "0"); }
  KvWriter& kv(std::string_view key, double value) {
    return kv(key, detail::format_double(value));
  }

  KvWriter& comment(std::string_view text) {
    os_ << "# " << text << "\n";
    return *this;
  }

 private:
  std::ostream& os_;
};

}  // namespace lrs
