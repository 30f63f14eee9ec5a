#include "solembed/normalizer.hpp"

#include <cctype>

namespace solembed {
namespace {

bool is_hex_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

std::string_view literal_class(std::string_view tok) {
  if (tok.empty()) return {};
  char c = tok.front();
  if (c == '"' || c == '\'' || tok.starts_with("unicode\"") || tok.starts_with("unicode'")) {
    return "STR";
  }
  if (tok.starts_with("hex\"") || tok.starts_with("hex'")) return "HEX";
  if (tok.size() > 2 && c == '0' && (tok[1] == 'x' || tok[1] == 'X') && is_hex_digits(tok.substr(2))) {
    std::size_t digits = 0;
    for (char d : tok.substr(2)) digits += d != '_';
    return digits == 40 ? "ADDR" : "HEX";
  }
  if (std::isdigit(static_cast<unsigned char>(c)) ||
      (c == '.' && tok.size() > 1 && std::isdigit(static_cast<unsigned char>(tok[1])))) {
    return "NUM";
  }
  return {};
}

class Serializer {
 public:
  explicit Serializer(std::string_view source_id) : source_id_(source_id) {}

  std::vector<Fragment> run(const AstNode& root) {
    visit(root, std::nullopt, std::nullopt);
    return std::move(out_);
  }

 private:
  void visit(const AstNode& node, std::optional<std::string> contract,
             std::optional<std::string> function) {
    std::optional<Granularity> g;
    if (node.kind == NodeKind::ContractDefinition) {
      g = Granularity::Contract;
    } else if (node.kind == NodeKind::FunctionDefinition ||
               node.kind == NodeKind::ModifierDefinition) {
      g = Granularity::Function;
    } else if (is_statement_kind(node.kind)) {
      g = Granularity::Statement;
    }
    if (g) {
      Fragment f;
      f.fragment_id = source_id_ + ":" + std::to_string(out_.size());
      f.source_id = source_id_;
      f.granularity = *g;
      f.span = node.span;
      if (*g == Granularity::Function) {
        f.parent_id = contract;
      } else if (*g == Granularity::Statement) {
        f.parent_id = function ? function : contract;
      }
      emit(node, f.stream);
      if (*g == Granularity::Contract) contract = f.fragment_id;
      if (*g == Granularity::Function) function = f.fragment_id;
      out_.push_back(std::move(f));
    }
    for (const auto& child : node.children) visit(child, contract, function);
  }

  static void emit(const AstNode& node, TokenStream& stream) {
    stream.emplace_back(to_string(node.kind));
    if (node.leaf_lexeme && node.children.empty()) stream.push_back(*node.leaf_lexeme);
    for (const auto& child : node.children) emit(child, stream);
  }

  std::string source_id_;
  std::vector<Fragment> out_;
};

}  // namespace

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::Contract: return "contract";
    case Granularity::Function: return "function";
    case Granularity::Statement: return "statement";
  }
  return "?";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
  for (auto g : kGranularities) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

std::vector<Fragment> serialize_fragments(const AstNode& root, std::string_view source_id) {
  return Serializer(source_id).run(root);
}

TokenStream normalize(const TokenStream& stream) {
  TokenStream out;
  out.reserve(stream.size());
  for (const auto& tok : stream) {
    if (tok == ";" || tok == ",") continue;
    auto cls = literal_class(tok);
    out.emplace_back(cls.empty() ? std::string_view(tok) : cls);
  }
  return out;
}

std::vector<Fragment> extract_fragments(const AstNode& root, std::string_view source_id) {
  auto fragments = serialize_fragments(root, source_id);
  for (auto& f : fragments) f.stream = normalize(f.stream);
  return fragments;
}

std::string join(const TokenStream& stream) {
  std::string s;
  for (const auto& tok : stream) {
    if (!s.empty()) s += ' ';
    s += tok;
  }
  return s;
}

Digest stream_digest(const TokenStream& stream) { return sha256(join(stream)); }

}  // namespace solembed
