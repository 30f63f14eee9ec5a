#include "solembed/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace solembed {
namespace {

constexpr std::array<std::string_view, 70> kKeywords = {
    "abstract", "address", "anonymous", "as", "assembly", "bool", "break", "byte", "bytes",
    "calldata", "constant", "constructor", "continue", "contract", "days", "delete", "do",
    "else", "emit", "enum", "ether", "event", "external", "fallback", "false", "finney",
    "fixed", "for", "function", "hours", "if", "import", "indexed", "int", "interface",
    "internal", "is", "library", "mapping", "memory", "minutes", "modifier", "new",
    "override", "payable", "pragma", "private", "public", "pure", "receive", "return",
    "returns", "seconds", "storage", "string", "struct", "szabo", "throw", "true", "ufixed",
    "uint", "using", "var", "view", "virtual", "weeks", "wei", "while", "years", "gwei",
};

// Longest first so that greedy matching picks multi-char operators.
constexpr std::array<std::string_view, 38> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "**", "=>", "==", "!=", "<=", ">=", "&&", "||", "++",
    "--",   "+=",  "-=",  "*=",  "/=", "%=", "|=", "&=", "^=", "<<", ">>", ":=", "=",
    "+",    "-",   "*",   "/",   "%",  "<",  ">",  "!",  "~",  "&",  "|",  "^",
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex_digit(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  LexResult run() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n' || c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else if (starts_with("//")) {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (starts_with("/*")) {
        block_comment();
      } else if (c == '"' || c == '\'') {
        string_literal(TokenKind::StringLiteral, 0);
      } else if ((starts_with("hex\"") || starts_with("hex'"))) {
        string_literal(TokenKind::HexLiteral, 3);
      } else if ((starts_with("unicode\"") || starts_with("unicode'"))) {
        string_literal(TokenKind::StringLiteral, 7);
      } else if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
        number();
      } else if (is_ident_start(c)) {
        identifier();
      } else if (c == '{' || c == '}' || c == '(' || c == ')' || c == '[' || c == ']' ||
                 c == ';' || c == ',' || c == '.' || c == '?' || c == ':') {
        if (c == ':' && starts_with(":=")) {
          emit_operator();
        } else {
          emit_fixed(TokenKind::Punctuator, 1);
        }
      } else if (!emit_operator()) {
        unexpected_character();
      }
    }
    return std::move(result_);
  }

 private:
  bool starts_with(std::string_view prefix) const {
    return text_.substr(pos_, prefix.size()) == prefix;
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) advance();
  }

  void skip_to_next_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') advance();
    if (pos_ < text_.size()) advance();
  }

  void error(std::string message, int line, int col) {
    result_.diagnostics.push_back({Severity::Error, std::move(message), line, col});
  }

  void push(TokenKind kind, std::size_t begin, int line, int col) {
    LexToken tok;
    tok.kind = kind;
    tok.lexeme = std::string(text_.substr(begin, pos_ - begin));
    tok.line = line;
    tok.col = col;
    tok.end_line = line_;
    tok.end_col = col_;
    result_.tokens.push_back(std::move(tok));
  }

  void emit_fixed(TokenKind kind, std::size_t n) {
    auto begin = pos_;
    int line = line_, col = col_;
    advance(n);
    push(kind, begin, line, col);
  }

  bool emit_operator() {
    for (auto op : kOperators) {
      if (starts_with(op)) {
        emit_fixed(TokenKind::Operator, op.size());
        return true;
      }
    }
    return false;
  }

  void block_comment() {
    int line = line_, col = col_;
    auto close = text_.find("*/", pos_ + 2);
    if (close == std::string_view::npos) {
      error("unterminated block comment", line, col);
      skip_to_next_line();
      return;
    }
    advance(close + 2 - pos_);
  }

  void string_literal(TokenKind kind, std::size_t prefix) {
    auto begin = pos_;
    int line = line_, col = col_;
    advance(prefix);
    char quote = text_[pos_];
    advance();
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == quote) {
        advance();
        push(kind, begin, line, col);
        return;
      }
      if (c == '\n') break;
      if (c == '\\' && pos_ + 1 < text_.size() && text_[pos_ + 1] != '\n') advance();
      advance();
    }
    error("unterminated string literal", line, col);
    skip_to_next_line();
  }

  void number() {
    auto begin = pos_;
    int line = line_, col = col_;
    if (starts_with("0x") || starts_with("0X")) {
      advance(2);
      std::size_t digits = 0;
      while (pos_ < text_.size() && (is_hex_digit(text_[pos_]) || text_[pos_] == '_')) {
        if (text_[pos_] != '_') ++digits;
        advance();
      }
      push(digits == 40 ? TokenKind::AddressLiteral : TokenKind::HexLiteral, begin, line, col);
      return;
    }
    auto digits = [&] {
      while (pos_ < text_.size() && (is_digit(text_[pos_]) || text_[pos_] == '_')) advance();
    };
    digits();
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' && is_digit(text_[pos_ + 1])) {
      advance();
      digits();
    } else if (pos_ < text_.size() && text_[pos_] == '.' && begin != pos_ &&
               (pos_ + 1 >= text_.size() || !is_ident_start(text_[pos_ + 1]))) {
      // "1." is a valid literal; "1.foo" is member access on a literal.
      advance();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && text_[look] == '-') ++look;
      if (look < text_.size() && is_digit(text_[look])) {
        advance(look - pos_);
        digits();
      }
    }
    push(TokenKind::NumberLiteral, begin, line, col);
  }

  void identifier() {
    auto begin = pos_;
    int line = line_, col = col_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
    auto word = text_.substr(begin, pos_ - begin);
    push(is_keyword(word) || is_elementary_type(word) ? TokenKind::Keyword : TokenKind::Identifier,
         begin, line, col);
  }

  void unexpected_character() {
    int line = line_, col = col_;
    auto c = static_cast<unsigned char>(text_[pos_]);
    std::size_t width = 1;
    if (c >= 0xF0) {
      width = 4;
    } else if (c >= 0xE0) {
      width = 3;
    } else if (c >= 0xC0) {
      width = 2;
    }
    error("unexpected character", line, col);
    advance(width);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  LexResult result_;
};

bool sized_suffix(std::string_view word, std::string_view base, int lo, int hi, int step) {
  if (word.substr(0, base.size()) != base) return false;
  auto rest = word.substr(base.size());
  if (rest.empty()) return true;
  if (!all_digits(rest) || rest.size() > 3 || rest[0] == '0') return false;
  int n = std::stoi(std::string(rest));
  return n >= lo && n <= hi && n % step == 0;
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Identifier: return "Identifier";
    case TokenKind::NumberLiteral: return "NumberLiteral";
    case TokenKind::StringLiteral: return "StringLiteral";
    case TokenKind::HexLiteral: return "HexLiteral";
    case TokenKind::AddressLiteral: return "AddressLiteral";
    case TokenKind::Punctuator: return "Punctuator";
    case TokenKind::Operator: return "Operator";
  }
  return "?";
}

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool is_elementary_type(std::string_view word) {
  if (word == "address" || word == "bool" || word == "string" || word == "byte" ||
      word == "bytes" || word == "var") {
    return true;
  }
  if (word.starts_with("uint")) return sized_suffix(word, "uint", 8, 256, 8);
  if (word.starts_with("int")) return sized_suffix(word, "int", 8, 256, 8);
  if (word.starts_with("bytes")) return sized_suffix(word, "bytes", 1, 32, 1);
  return word == "fixed" || word == "ufixed";
}

LexResult tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace solembed
