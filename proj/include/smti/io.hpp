#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smti/audit.hpp"
#include "smti/core.hpp"

// Text and JSON formats. Instance grammar (line oriented, UTF-8, LF, `#`
// starts a comment, ids 1-based in files):
//
//   smti <n_left> <n_right>
//   cap m <id> <b>              (optional; capacities default to 1)
//   cap w <id> <b>
//   m <id>: <pref>              (one line per agent; empty <pref> allowed)
//   w <id>: <pref>
//
// <pref> items are partner ids (`w3` on m-lines, `m3` on w-lines) or
// parenthesized ties `( w1 w2 )`. Matching files: a `matching` header, then
// sorted `match m<i> w<j>` lines. Serialization is canonical (single spaces,
// ascending ids, capacities only when not 1), so parse/serialize round-trip
// to identical bytes.

namespace smti {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
  int line, col;
};

namespace detail {

struct Token {
  std::string text;
  int line, col;  // 1-based
};

// Whitespace-split with '(', ')' and ':' broken out as their own tokens and
// '#' cutting the rest of its line.
inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::string cur;
  int cur_line = 0, cur_col = 0;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back({cur, cur_line, cur_col});
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '#') {
      flush();
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
      continue;
    }
    if (c == '\n') {
      flush();
      out.push_back({"\n", line, col});
      ++line;
      col = 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '(' || c == ')' || c == ':') {
      flush();
      out.push_back({std::string(1, c), line, col});
    } else {
      if (cur.empty()) {
        cur_line = line;
        cur_col = col;
      }
      cur += c;
    }
    ++col;
  }
  flush();
  return out;
}

inline int parse_int(const Token& t, const std::string& what) {
  if (t.text.empty() || t.text == "\n")
    throw ParseError(t.line, t.col, "expected " + what);
  for (char c : t.text)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ParseError(t.line, t.col, "expected " + what + ", got '" + t.text + "'");
  try {
    return std::stoi(t.text);
  } catch (const std::exception&) {
    throw ParseError(t.line, t.col, what + " out of range: '" + t.text + "'");
  }
}

// `m3` / `w3` with the expected side tag; returns the 0-based id.
inline int parse_agent(const Token& t, char tag) {
  if (t.text.size() < 2 || t.text[0] != tag)
    throw ParseError(t.line, t.col,
                     std::string("expected ") + tag + "<id>, got '" + t.text + "'");
  Token num{t.text.substr(1), t.line, t.col + 1};
  int id = parse_int(num, "agent id");
  if (id < 1) throw ParseError(t.line, t.col, "agent ids are 1-based");
  return id - 1;
}

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}
  bool done() const { return pos_ >= toks_.size(); }
  const Token& peek() const {
    static const Token eof{"", 0, 0};
    return done() ? eof : toks_[pos_];
  }
  Token take() {
    if (done()) throw ParseError(last_line(), 1, "unexpected end of input");
    return toks_[pos_++];
  }
  void skip_newlines() {
    while (!done() && toks_[pos_].text == "\n") ++pos_;
  }
  int last_line() const { return toks_.empty() ? 1 : toks_.back().line; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Instance parse_instance(const std::string& text) {
  detail::TokenStream ts(detail::tokenize(text));
  ts.skip_newlines();
  {
    auto kw = ts.take();
    if (kw.text != "smti")
      throw ParseError(kw.line, kw.col, "expected 'smti <n_left> <n_right>' header");
  }
  InstanceData d;
  d.n_left = detail::parse_int(ts.take(), "left agent count");
  d.n_right = detail::parse_int(ts.take(), "right agent count");
  d.prefs_left.resize(d.n_left);
  d.prefs_right.resize(d.n_right);
  std::vector<char> seen_left(d.n_left, 0), seen_right(d.n_right, 0);

  auto check_id = [](const detail::Token& t, int id, int n) {
    if (id >= n)
      throw ParseError(t.line, t.col, "agent id " + std::to_string(id + 1) +
                                          " exceeds the declared count");
  };

  ts.skip_newlines();
  while (!ts.done()) {
    auto head = ts.take();
    if (head.text == "cap") {
      auto side = ts.take();
      if (side.text != "m" && side.text != "w")
        throw ParseError(side.line, side.col, "expected 'cap m' or 'cap w'");
      bool left = side.text == "m";
      int id = detail::parse_int(ts.take(), "agent id") - 1;
      if (id < 0) throw ParseError(side.line, side.col, "agent ids are 1-based");
      check_id(side, id, left ? d.n_left : d.n_right);
      int b = detail::parse_int(ts.take(), "capacity");
      auto& caps = left ? d.cap_left : d.cap_right;
      if (caps.empty()) caps.assign(left ? d.n_left : d.n_right, 1);
      caps[id] = b;
    } else if (head.text == "m" || head.text == "w") {
      bool left = head.text == "m";
      int id = detail::parse_int(ts.take(), "agent id") - 1;
      if (id < 0) throw ParseError(head.line, head.col, "agent ids are 1-based");
      check_id(head, id, left ? d.n_left : d.n_right);
      auto colon = ts.take();
      if (colon.text != ":")
        throw ParseError(colon.line, colon.col, "expected ':' after agent id");
      auto& seen = left ? seen_left : seen_right;
      if (seen[id])
        throw ParseError(head.line, head.col,
                         "duplicate list for " + head.text + std::to_string(id + 1));
      seen[id] = 1;
      auto& prefs = left ? d.prefs_left[id] : d.prefs_right[id];
      const char tag = left ? 'w' : 'm';
      while (!ts.done() && ts.peek().text != "\n") {
        auto t = ts.take();
        if (t.text == "(") {
          prefs.emplace_back();
          while (true) {
            if (ts.done() || ts.peek().text == "\n")
              throw ParseError(t.line, t.col, "unclosed tie");
            auto inner = ts.take();
            if (inner.text == ")") break;
            prefs.back().push_back(detail::parse_agent(inner, tag));
          }
          if (prefs.back().empty())
            throw ParseError(t.line, t.col, "empty tie");
        } else if (t.text == ")") {
          throw ParseError(t.line, t.col, "')' without matching '('");
        } else {
          prefs.push_back({detail::parse_agent(t, tag)});
        }
      }
    } else {
      throw ParseError(head.line, head.col,
                       "expected 'cap', 'm <id>:' or 'w <id>:', got '" + head.text + "'");
    }
    ts.skip_newlines();
  }
  return Instance::create(std::move(d));
}

inline std::string serialize_instance(const Instance& inst) {
  std::ostringstream out;
  out << "smti " << inst.n_left() << ' ' << inst.n_right() << '\n';
  for (Side s : {Side::LeftU, Side::RightW}) {
    const char* tag = side_tag(s);
    for (int i = 0; i < inst.n(s); ++i)
      if (inst.capacity(s, i) != 1)
        out << "cap " << tag << ' ' << i + 1 << ' ' << inst.capacity(s, i) << '\n';
  }
  for (Side s : {Side::LeftU, Side::RightW}) {
    const char *tag = side_tag(s), *other = side_tag(opposite(s));
    for (int i = 0; i < inst.n(s); ++i) {
      out << tag << ' ' << i + 1 << ':';
      for (const auto& tie : inst.prefs(s, i)) {
        if (tie.size() == 1) {
          out << ' ' << other << tie[0] + 1;
        } else {
          out << " (";
          for (int p : tie) out << ' ' << other << p + 1;
          out << " )";
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

inline std::string serialize_matching(const Matching& m) {
  std::ostringstream out;
  out << "matching\n";
  for (auto [u, w] : m.edges())
    out << "match m" << u + 1 << " w" << w + 1 << '\n';
  return out.str();
}

inline Matching parse_matching(const std::string& text, const Instance& inst) {
  detail::TokenStream ts(detail::tokenize(text));
  ts.skip_newlines();
  {
    auto kw = ts.take();
    if (kw.text != "matching")
      throw ParseError(kw.line, kw.col, "expected 'matching' header");
  }
  ts.skip_newlines();
  std::vector<std::pair<int, int>> edges;
  while (!ts.done()) {
    auto kw = ts.take();
    if (kw.text != "match")
      throw ParseError(kw.line, kw.col, "expected 'match m<i> w<j>'");
    int u = detail::parse_agent(ts.take(), 'm');
    int w = detail::parse_agent(ts.take(), 'w');
    if (u >= inst.n_left() || w >= inst.n_right() || inst.edge_id(u, w) < 0)
      throw InvalidMatching("matching file pairs m" + std::to_string(u + 1) +
                            " with w" + std::to_string(w + 1) +
                            ", which is not an edge of the instance");
    edges.emplace_back(u, w);
    ts.skip_newlines();
  }
  Matching m(std::move(edges));
  for (std::size_t i = 1; i < m.edges().size(); ++i)
    if (m.edges()[i] == m.edges()[i - 1])
      throw InvalidMatching("duplicate matching edge m" +
                            std::to_string(m.edges()[i].first + 1) + " w" +
                            std::to_string(m.edges()[i].second + 1));
  if (!is_valid_matching(inst, m))
    throw InvalidMatching("matching file violates a capacity constraint");
  return m;
}

// --- JSON mirrors (1-based ids, same information as the text forms) ---

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["n_left"] = inst.n_left();
  j["n_right"] = inst.n_right();
  auto prefs = [](const Instance& in, Side s) {
    nlohmann::json lists = nlohmann::json::array();
    for (int i = 0; i < in.n(s); ++i) {
      nlohmann::json agent = nlohmann::json::array();
      for (const auto& tie : in.prefs(s, i)) {
        nlohmann::json t = nlohmann::json::array();
        for (int p : tie) t.push_back(p + 1);
        agent.push_back(std::move(t));
      }
      lists.push_back(std::move(agent));
    }
    return lists;
  };
  j["prefs_left"] = prefs(inst, Side::LeftU);
  j["prefs_right"] = prefs(inst, Side::RightW);
  if (!inst.data().cap_left.empty()) j["cap_left"] = inst.data().cap_left;
  if (!inst.data().cap_right.empty()) j["cap_right"] = inst.data().cap_right;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  InstanceData d;
  d.n_left = j.at("n_left").get<int>();
  d.n_right = j.at("n_right").get<int>();
  auto prefs = [](const nlohmann::json& lists) {
    std::vector<PreferenceList> out;
    for (const auto& agent : lists) {
      PreferenceList pl;
      for (const auto& tie : agent) {
        std::vector<int> t;
        for (const auto& p : tie) t.push_back(p.get<int>() - 1);
        pl.push_back(std::move(t));
      }
      out.push_back(std::move(pl));
    }
    return out;
  };
  d.prefs_left = prefs(j.at("prefs_left"));
  d.prefs_right = prefs(j.at("prefs_right"));
  if (j.contains("cap_left")) d.cap_left = j.at("cap_left").get<std::vector<int>>();
  if (j.contains("cap_right")) d.cap_right = j.at("cap_right").get<std::vector<int>>();
  return Instance::create(std::move(d));
}

inline nlohmann::json matching_to_json(const Matching& m) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [u, w] : m.edges()) edges.push_back({u + 1, w + 1});
  return nlohmann::json{{"edges", std::move(edges)}};
}

inline Matching matching_from_json(const nlohmann::json& j, const Instance& inst) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) {
    int u = e.at(0).get<int>() - 1, w = e.at(1).get<int>() - 1;
    if (u < 0 || w < 0 || u >= inst.n_left() || w >= inst.n_right() ||
        inst.edge_id(u, w) < 0)
      throw InvalidMatching("json matching pairs m" + std::to_string(u + 1) +
                            " with w" + std::to_string(w + 1) +
                            ", which is not an edge of the instance");
    edges.emplace_back(u, w);
  }
  Matching m(std::move(edges));
  if (!is_valid_matching(inst, m))
    throw InvalidMatching("json matching violates a capacity constraint");
  return m;
}

// --- Audit report forms ---

inline std::string serialize_audit(const AuditReport& r) {
  std::ostringstream out;
  out << "audit\n";
  out << "valid " << (r.valid ? "true" : "false") << '\n';
  for (auto [u, w] : r.blocking_pairs)
    out << "blocking m" << u + 1 << " w" << w + 1 << '\n';
  for (const auto& p : r.dangerous_paths) {
    out << "dangerous w" << p.w + 1 << " m" << p.u1 + 1 << " w" << p.w1 + 1
        << " m" << p.u + 1;
    if (p.masculine) out << " masculine";
    if (p.feminine) out << " feminine";
    out << '\n';
  }
  out << "stable " << (r.stable() ? "true" : "false") << '\n';
  out << "dangerous_free " << (r.dangerous_free() ? "true" : "false") << '\n';
  return out.str();
}

inline nlohmann::json audit_to_json(const AuditReport& r) {
  nlohmann::json j;
  j["valid"] = r.valid;
  auto blocking = nlohmann::json::array();
  for (auto [u, w] : r.blocking_pairs) blocking.push_back({u + 1, w + 1});
  j["blocking_pairs"] = std::move(blocking);
  auto paths = nlohmann::json::array();
  for (const auto& p : r.dangerous_paths) {
    nlohmann::json kinds = nlohmann::json::array();
    if (p.masculine) kinds.push_back("masculine");
    if (p.feminine) kinds.push_back("feminine");
    paths.push_back({{"path", {p.w + 1, p.u1 + 1, p.w1 + 1, p.u + 1}},
                     {"kinds", std::move(kinds)}});
  }
  j["dangerous_paths"] = std::move(paths);
  j["stable"] = r.stable();
  j["dangerous_free"] = r.dangerous_free();
  return j;
}

}  // namespace smti
