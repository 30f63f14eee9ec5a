#include "solembed/parser.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "solembed/lexer.hpp"

namespace solembed {
namespace {

constexpr int kMaxDepth = 200;

struct ParseError : std::runtime_error {
  ParseError(std::string message, Position where)
      : std::runtime_error(std::move(message)), where(where) {}
  Position where;
};

constexpr std::array<std::string_view, 12> kAssignmentOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>=",
};

constexpr std::array<std::string_view, 10> kUnits = {
    "wei", "gwei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks",
};

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
  if (op == "|") return 5;
  if (op == "^") return 6;
  if (op == "&") return 7;
  if (op == "<<" || op == ">>" || op == ">>>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  if (op == "**") return 11;
  return 0;
}

bool is_visibility_or_mutability(std::string_view w) {
  return w == "public" || w == "private" || w == "internal" || w == "external" || w == "pure" ||
         w == "view" || w == "payable" || w == "constant" || w == "override" || w == "virtual";
}

bool is_storage_location(std::string_view w) {
  return w == "memory" || w == "storage" || w == "calldata";
}

AstNode leaf(NodeKind kind, const LexToken& tok) {
  AstNode n;
  n.kind = kind;
  n.span = tok.span();
  n.leaf_lexeme = tok.lexeme;
  return n;
}

class Parser {
 public:
  explicit Parser(LexResult lexed)
      : tokens_(std::move(lexed.tokens)), diagnostics_(std::move(lexed.diagnostics)) {}

  ParseResult run() {
    AstNode root;
    root.kind = NodeKind::SourceUnitNode;
    while (!at_end()) {
      std::size_t before = pos_;
      try {
        parse_top_level(root);
      } catch (const ParseError& e) {
        report(e);
        recover();
      }
      if (pos_ == before) {
        // A stray `}` at depth 0 is the only token recovery leaves in place.
        report(ParseError("unexpected '" + peek().lexeme + "'", peek().span().start));
        ++pos_;
      }
    }
    root.span.start = {1, 1};
    root.span.end = tokens_.empty() ? Position{1, 1} : tokens_.back().span().end;
    return {std::move(root), std::move(diagnostics_)};
  }

 private:
  // --- token helpers -------------------------------------------------------

  bool at_end() const { return pos_ >= tokens_.size(); }

  const LexToken& peek(std::size_t ahead = 0) const {
    static const LexToken kEof{TokenKind::Punctuator, "<eof>", 0, 0, 0, 0};
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : kEof;
  }

  Position here() const {
    if (!at_end()) return peek().span().start;
    return tokens_.empty() ? Position{1, 1} : tokens_.back().span().end;
  }

  bool check(std::string_view lexeme, std::size_t ahead = 0) const {
    if (pos_ + ahead >= tokens_.size()) return false;
    const auto& t = tokens_[pos_ + ahead];
    return t.lexeme == lexeme && t.kind != TokenKind::StringLiteral &&
           t.kind != TokenKind::HexLiteral;
  }

  bool check_kind(TokenKind kind, std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() && tokens_[pos_ + ahead].kind == kind;
  }

  bool accept(std::string_view lexeme) {
    if (!check(lexeme)) return false;
    ++pos_;
    return true;
  }

  const LexToken& expect(std::string_view lexeme) {
    if (!check(lexeme)) {
      throw ParseError("expected '" + std::string(lexeme) + "' but found " + describe(), here());
    }
    return tokens_[pos_++];
  }

  const LexToken& expect_identifier() {
    if (!check_kind(TokenKind::Identifier)) {
      throw ParseError("expected identifier but found " + describe(), here());
    }
    return tokens_[pos_++];
  }

  std::string describe() const {
    return at_end() ? std::string("end of input") : "'" + peek().lexeme + "'";
  }

  Position last_end() const {
    return pos_ == 0 ? Position{1, 1} : tokens_[pos_ - 1].span().end;
  }

  AstNode open(NodeKind kind) const {
    AstNode n;
    n.kind = kind;
    n.span.start = here();
    n.span.end = n.span.start;
    return n;
  }

  AstNode& close(AstNode& n) const {
    n.span.end = std::max(last_end(), n.span.start);
    return n;
  }

  void report(const ParseError& e) {
    diagnostics_.push_back({Severity::Error, e.what(), e.where.line, e.where.col});
  }

  void warn(std::string message, Position where) {
    diagnostics_.push_back({Severity::Warning, std::move(message), where.line, where.col});
  }

  /// Skip to the next `;` (consumed) or the `}` matching a brace opened while
  /// skipping (consumed). A `}` at depth 0 is left for the enclosing construct.
  void recover() {
    int depth = 0;
    while (!at_end()) {
      const auto& t = peek();
      if (t.kind == TokenKind::Punctuator) {
        if (t.lexeme == "{") {
          ++depth;
        } else if (t.lexeme == "}") {
          if (depth == 0) return;
          if (--depth == 0) {
            ++pos_;
            return;
          }
        } else if (t.lexeme == ";" && depth == 0) {
          ++pos_;
          return;
        }
      }
      ++pos_;
    }
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxDepth) {
        --parser.depth_;
        throw ParseError("nesting too deep", parser.here());
      }
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  // --- top level -----------------------------------------------------------

  void parse_top_level(AstNode& root) {
    if (check("pragma")) {
      root.children.push_back(parse_pragma());
    } else if (check("import")) {
      root.children.push_back(parse_import());
    } else if (check("contract") || check("interface") || check("library") ||
               (check("abstract") && check("contract", 1))) {
      root.children.push_back(parse_contract());
    } else if (check(";")) {
      ++pos_;
    } else if (check("}")) {
      return;
    } else {
      throw ParseError("expected pragma, import or contract but found " + describe(), here());
    }
  }

  AstNode parse_pragma() {
    auto n = open(NodeKind::PragmaDirective);
    expect("pragma");
    n.leaf_lexeme = at_end() ? std::string() : peek().lexeme;
    while (!at_end() && !check(";")) ++pos_;
    expect(";");
    return close(n);
  }

  AstNode parse_import() {
    auto n = open(NodeKind::ImportDirective);
    expect("import");
    n.leaf_lexeme = std::string();
    while (!at_end() && !check(";")) {
      if (peek().kind == TokenKind::StringLiteral) n.leaf_lexeme = peek().lexeme;
      ++pos_;
    }
    expect(";");
    return close(n);
  }

  AstNode parse_contract() {
    auto n = open(NodeKind::ContractDefinition);
    if (check("abstract")) n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
    n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
    n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    if (accept("is")) {
      do {
        n.children.push_back(parse_inheritance());
      } while (accept(","));
    }
    expect("{");
    while (!at_end() && !check("}")) {
      std::size_t before = pos_;
      try {
        parse_member(n);
      } catch (const ParseError& e) {
        report(e);
        recover();
      }
      if (pos_ == before) break;
    }
    if (at_end()) {
      report(ParseError("expected '}' to close contract", here()));
    } else {
      expect("}");
    }
    return close(n);
  }

  AstNode parse_inheritance() {
    auto n = open(NodeKind::InheritanceSpecifier);
    n.children.push_back(parse_user_type());
    if (check("(")) parse_arguments(n);
    return close(n);
  }

  // --- contract members ----------------------------------------------------

  void parse_member(AstNode& contract) {
    if (check("function") || check("constructor") || check("fallback") || check("receive")) {
      contract.children.push_back(parse_function());
    } else if (check("modifier")) {
      contract.children.push_back(parse_modifier());
    } else if (check("event")) {
      contract.children.push_back(parse_event());
    } else if (check("struct")) {
      contract.children.push_back(parse_struct());
    } else if (check("enum")) {
      contract.children.push_back(parse_enum());
    } else if (check("using")) {
      contract.children.push_back(parse_using());
    } else if (check(";")) {
      ++pos_;
    } else {
      contract.children.push_back(parse_state_variable());
    }
  }

  AstNode parse_function() {
    auto n = open(NodeKind::FunctionDefinition);
    const auto& head = tokens_[pos_++];
    if (head.lexeme == "function") {
      if (check_kind(TokenKind::Identifier)) {
        n.children.push_back(leaf(NodeKind::Name, tokens_[pos_++]));
      } else if (check("receive") || check("fallback")) {
        n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
      }
    } else {
      n.children.push_back(leaf(NodeKind::Specifier, head));
    }
    n.children.push_back(parse_parameter_list(false));
    parse_function_tail(n);
    return close(n);
  }

  // Specifiers, modifiers, returns and body shared by functions.
  void parse_function_tail(AstNode& n) {
    while (!at_end() && !check("{") && !check(";")) {
      const auto& t = peek();
      if (t.kind == TokenKind::Keyword && is_visibility_or_mutability(t.lexeme)) {
        n.children.push_back(leaf(NodeKind::Specifier, t));
        ++pos_;
        if (t.lexeme == "override" && check("(")) skip_balanced("(", ")");
      } else if (check("returns")) {
        n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
        n.children.push_back(parse_parameter_list(false));
      } else if (check_kind(TokenKind::Identifier)) {
        auto mod = open(NodeKind::ModifierInvocation);
        mod.children.push_back(parse_user_type());
        if (check("(")) parse_arguments(mod);
        n.children.push_back(close(mod));
      } else {
        throw ParseError("unexpected " + describe() + " in function header", here());
      }
    }
    if (!accept(";")) n.children.push_back(parse_block());
  }

  AstNode parse_modifier() {
    auto n = open(NodeKind::ModifierDefinition);
    expect("modifier");
    n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    if (check("(")) n.children.push_back(parse_parameter_list(false));
    while (check("virtual") || check("override")) {
      n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
    }
    if (!accept(";")) n.children.push_back(parse_block());
    return close(n);
  }

  AstNode parse_event() {
    auto n = open(NodeKind::EventDefinition);
    expect("event");
    n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    n.children.push_back(parse_parameter_list(true));
    if (check("anonymous")) n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
    expect(";");
    return close(n);
  }

  AstNode parse_struct() {
    auto n = open(NodeKind::StructDefinition);
    expect("struct");
    n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    expect("{");
    while (!at_end() && !check("}")) {
      auto member = open(NodeKind::Parameter);
      member.children.push_back(parse_type());
      member.children.push_back(leaf(NodeKind::Name, expect_identifier()));
      expect(";");
      n.children.push_back(close(member));
    }
    expect("}");
    return close(n);
  }

  AstNode parse_enum() {
    auto n = open(NodeKind::EnumDefinition);
    expect("enum");
    n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    expect("{");
    while (!at_end() && !check("}")) {
      n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
      if (!accept(",")) break;
    }
    expect("}");
    return close(n);
  }

  AstNode parse_using() {
    auto n = open(NodeKind::UsingForDirective);
    expect("using");
    n.children.push_back(parse_user_type());
    expect("for");
    if (check("*")) {
      n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
    } else {
      n.children.push_back(parse_type());
    }
    expect(";");
    return close(n);
  }

  AstNode parse_state_variable() {
    auto n = open(NodeKind::StateVariableDeclaration);
    n.children.push_back(parse_type());
    while (check_kind(TokenKind::Keyword) &&
           (is_visibility_or_mutability(peek().lexeme) || check("immutable"))) {
      n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
    }
    n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    if (accept("=")) n.children.push_back(parse_expression());
    expect(";");
    return close(n);
  }

  AstNode parse_parameter_list(bool allow_indexed) {
    auto n = open(NodeKind::ParameterList);
    expect("(");
    if (!check(")")) {
      do {
        auto p = open(NodeKind::Parameter);
        p.children.push_back(parse_type());
        while ((allow_indexed && check("indexed")) ||
               (check_kind(TokenKind::Keyword) && is_storage_location(peek().lexeme))) {
          p.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
        }
        if (check_kind(TokenKind::Identifier)) {
          p.children.push_back(leaf(NodeKind::Name, tokens_[pos_++]));
        }
        n.children.push_back(close(p));
      } while (accept(","));
    }
    expect(")");
    return close(n);
  }

  // --- types ---------------------------------------------------------------

  AstNode parse_user_type() {
    const auto& first = expect_identifier();
    auto n = leaf(NodeKind::TypeName, first);
    while (check(".") && check_kind(TokenKind::Identifier, 1)) {
      ++pos_;
      const auto& part = tokens_[pos_++];
      *n.leaf_lexeme += "." + part.lexeme;
      n.span.end = part.span().end;
    }
    return n;
  }

  AstNode parse_type() {
    DepthGuard guard(*this);
    AstNode base;
    if (check("mapping")) {
      base = open(NodeKind::MappingType);
      ++pos_;
      expect("(");
      base.children.push_back(parse_type());
      expect("=>");
      base.children.push_back(parse_type());
      expect(")");
      close(base);
    } else if (check_kind(TokenKind::Keyword) && is_elementary_type(peek().lexeme)) {
      base = leaf(NodeKind::TypeName, tokens_[pos_++]);
      if (base.leaf_lexeme == "address" && check("payable")) ++pos_;
      close(base);
    } else if (check_kind(TokenKind::Identifier)) {
      base = parse_user_type();
    } else {
      throw ParseError("expected type name but found " + describe(), here());
    }
    while (check("[")) {
      AstNode arr;
      arr.kind = NodeKind::ArrayType;
      arr.span.start = base.span.start;
      arr.children.push_back(std::move(base));
      ++pos_;
      if (!check("]")) arr.children.push_back(parse_expression());
      expect("]");
      base = std::move(close(arr));
    }
    return base;
  }

  // --- statements ----------------------------------------------------------

  AstNode parse_block() {
    DepthGuard guard(*this);
    auto n = open(NodeKind::Block);
    expect("{");
    while (!at_end() && !check("}")) {
      n.children.push_back(parse_statement());
    }
    if (at_end()) {
      report(ParseError("expected '}' to close block", here()));
    } else {
      ++pos_;
    }
    return close(n);
  }

  AstNode parse_statement() {
    DepthGuard guard(*this);
    std::size_t begin = pos_;
    try {
      return parse_statement_inner();
    } catch (const ParseError& e) {
      report(e);
      recover();
      if (begin >= tokens_.size()) {
        auto n = open(NodeKind::UnknownStatement);
        return n;
      }
      auto n = leaf(NodeKind::UnknownStatement, tokens_[begin]);
      n.span.end = std::max(last_end(), n.span.start);
      if (pos_ == begin && !at_end()) ++pos_;
      return n;
    }
  }

  AstNode parse_statement_inner() {
    if (check("{")) return parse_block();
    if (check("if")) return parse_if();
    if (check("for")) return parse_for();
    if (check("while")) return parse_while();
    if (check("do")) return parse_do_while();
    if (check("return")) {
      auto n = open(NodeKind::ReturnStatement);
      ++pos_;
      if (!check(";")) n.children.push_back(parse_expression());
      expect(";");
      return close(n);
    }
    if (check("emit")) {
      auto n = open(NodeKind::EmitStatement);
      ++pos_;
      n.children.push_back(parse_expression());
      expect(";");
      return close(n);
    }
    if (check("break") || check("continue") || check("throw")) {
      auto kind = check("break")      ? NodeKind::BreakStatement
                  : check("continue") ? NodeKind::ContinueStatement
                                      : NodeKind::ThrowStatement;
      auto n = open(kind);
      ++pos_;
      expect(";");
      return close(n);
    }
    if (check("assembly")) return parse_assembly();
    if (auto decl = try_parse_declaration()) return std::move(*decl);
    auto n = open(NodeKind::ExpressionStatement);
    n.children.push_back(parse_expression());
    expect(";");
    return close(n);
  }

  AstNode parse_if() {
    auto n = open(NodeKind::IfStatement);
    expect("if");
    expect("(");
    n.children.push_back(parse_expression());
    expect(")");
    n.children.push_back(parse_statement());
    if (accept("else")) n.children.push_back(parse_statement());
    return close(n);
  }

  AstNode parse_for() {
    auto n = open(NodeKind::ForStatement);
    expect("for");
    expect("(");
    if (!accept(";")) n.children.push_back(parse_simple_statement());
    if (!check(";")) n.children.push_back(parse_expression());
    expect(";");
    if (!check(")")) {
      auto update = open(NodeKind::ExpressionStatement);
      update.children.push_back(parse_expression());
      n.children.push_back(close(update));
    }
    expect(")");
    n.children.push_back(parse_statement());
    return close(n);
  }

  // Declaration or expression statement, including its `;`.
  AstNode parse_simple_statement() {
    if (auto decl = try_parse_declaration()) return std::move(*decl);
    auto n = open(NodeKind::ExpressionStatement);
    n.children.push_back(parse_expression());
    expect(";");
    return close(n);
  }

  AstNode parse_while() {
    auto n = open(NodeKind::WhileStatement);
    expect("while");
    expect("(");
    n.children.push_back(parse_expression());
    expect(")");
    n.children.push_back(parse_statement());
    return close(n);
  }

  AstNode parse_do_while() {
    auto n = open(NodeKind::DoWhileStatement);
    expect("do");
    n.children.push_back(parse_statement());
    expect("while");
    expect("(");
    n.children.push_back(parse_expression());
    expect(")");
    expect(";");
    return close(n);
  }

  AstNode parse_assembly() {
    auto n = leaf(NodeKind::UnknownStatement, peek());
    warn("inline assembly is not analyzed", here());
    ++pos_;
    if (check_kind(TokenKind::StringLiteral)) ++pos_;
    if (!check("{")) throw ParseError("expected '{' after assembly", here());
    skip_balanced("{", "}");
    n.span.end = last_end();
    return n;
  }

  void skip_balanced(std::string_view open_tok, std::string_view close_tok) {
    int depth = 0;
    while (!at_end()) {
      if (check(open_tok)) {
        ++depth;
      } else if (check(close_tok) && --depth == 0) {
        ++pos_;
        return;
      }
      ++pos_;
    }
    throw ParseError("expected '" + std::string(close_tok) + "'", here());
  }

  /// Speculatively parses `type [location] name [= expr];` or the tuple forms.
  /// Restores the position and returns nullopt if the input is not a declaration.
  std::optional<AstNode> try_parse_declaration() {
    std::size_t start = pos_;
    auto n = open(NodeKind::VariableDeclarationStatement);
    if (check("var") && check("(", 1)) {
      ++pos_;
      parse_tuple_declaration(n, true);
    } else if (check("(")) {
      try {
        parse_tuple_declaration(n, false);
      } catch (const ParseError&) {
        pos_ = start;
        return std::nullopt;
      }
    } else {
      AstNode type;
      try {
        type = parse_type();
      } catch (const ParseError&) {
        pos_ = start;
        return std::nullopt;
      }
      bool location = check_kind(TokenKind::Keyword) && is_storage_location(peek().lexeme);
      if (!location && !check_kind(TokenKind::Identifier)) {
        pos_ = start;
        return std::nullopt;
      }
      n.children.push_back(std::move(type));
      if (location) n.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
      n.children.push_back(leaf(NodeKind::Name, expect_identifier()));
    }
    if (accept("=")) n.children.push_back(parse_expression());
    expect(";");
    return std::move(close(n));
  }

  // `(uint a, , bytes memory b) = ...` or, after `var`, `(a, b) = ...`.
  void parse_tuple_declaration(AstNode& n, bool names_only) {
    expect("(");
    bool any = false;
    while (!check(")")) {
      if (!check(",")) {
        auto p = open(NodeKind::Parameter);
        if (!names_only) {
          p.children.push_back(parse_type());
          if (check_kind(TokenKind::Keyword) && is_storage_location(peek().lexeme)) {
            p.children.push_back(leaf(NodeKind::Specifier, tokens_[pos_++]));
          }
        }
        p.children.push_back(leaf(NodeKind::Name, expect_identifier()));
        n.children.push_back(close(p));
        any = true;
      }
      if (!accept(",")) break;
    }
    expect(")");
    if (!any || !check("=")) throw ParseError("not a tuple declaration", here());
  }

  // --- expressions ---------------------------------------------------------

  AstNode parse_expression() {
    DepthGuard guard(*this);
    return parse_assignment();
  }

  AstNode parse_assignment() {
    auto lhs = parse_conditional();
    if (check_kind(TokenKind::Operator) &&
        std::find(kAssignmentOps.begin(), kAssignmentOps.end(), peek().lexeme) !=
            kAssignmentOps.end()) {
      AstNode n;
      n.kind = NodeKind::Assignment;
      n.span.start = lhs.span.start;
      n.children.push_back(std::move(lhs));
      n.children.push_back(leaf(NodeKind::Operator, tokens_[pos_++]));
      n.children.push_back(parse_expression());
      return std::move(close(n));
    }
    return lhs;
  }

  AstNode parse_conditional() {
    auto cond = parse_binary(1);
    if (!check("?")) return cond;
    ++pos_;
    AstNode n;
    n.kind = NodeKind::ConditionalExpr;
    n.span.start = cond.span.start;
    n.children.push_back(std::move(cond));
    n.children.push_back(parse_expression());
    expect(":");
    n.children.push_back(parse_expression());
    return std::move(close(n));
  }

  AstNode parse_binary(int min_prec) {
    auto lhs = parse_unary();
    while (check_kind(TokenKind::Operator)) {
      int prec = binary_precedence(peek().lexeme);
      if (prec == 0 || prec < min_prec) break;
      AstNode n;
      n.kind = NodeKind::BinaryOp;
      n.span.start = lhs.span.start;
      n.children.push_back(std::move(lhs));
      const auto& op = tokens_[pos_++];
      n.children.push_back(leaf(NodeKind::Operator, op));
      DepthGuard guard(*this);
      n.children.push_back(parse_binary(op.lexeme == "**" ? prec : prec + 1));
      lhs = std::move(close(n));
    }
    return lhs;
  }

  AstNode parse_unary() {
    DepthGuard guard(*this);
    const auto& t = peek();
    bool prefix = (t.kind == TokenKind::Operator &&
                   (t.lexeme == "!" || t.lexeme == "~" || t.lexeme == "-" || t.lexeme == "+" ||
                    t.lexeme == "++" || t.lexeme == "--")) ||
                  check("delete");
    if (!prefix) return parse_postfix();
    auto n = open(NodeKind::UnaryOp);
    n.children.push_back(leaf(NodeKind::Operator, tokens_[pos_++]));
    n.children.push_back(parse_unary());
    return close(n);
  }

  AstNode parse_postfix() {
    auto expr = parse_primary();
    for (;;) {
      AstNode n;
      n.span.start = expr.span.start;
      if (check("(")) {
        n.kind = NodeKind::FunctionCall;
        n.children.push_back(std::move(expr));
        parse_arguments(n);
      } else if (check(".")) {
        ++pos_;
        n.kind = NodeKind::MemberAccess;
        n.children.push_back(std::move(expr));
        if (!check_kind(TokenKind::Identifier) && !check_kind(TokenKind::Keyword)) {
          throw ParseError("expected member name but found " + describe(), here());
        }
        n.children.push_back(leaf(NodeKind::Name, tokens_[pos_++]));
      } else if (check("[")) {
        ++pos_;
        n.kind = NodeKind::IndexAccess;
        n.children.push_back(std::move(expr));
        if (!check("]")) n.children.push_back(parse_expression());
        if (accept(":") && !check("]")) n.children.push_back(parse_expression());
        expect("]");
      } else if (check("++") || check("--")) {
        n.kind = NodeKind::UnaryOp;
        n.children.push_back(std::move(expr));
        n.children.push_back(leaf(NodeKind::Operator, tokens_[pos_++]));
      } else {
        return expr;
      }
      expr = std::move(close(n));
    }
  }

  void parse_arguments(AstNode& call) {
    expect("(");
    if (check("{")) {
      ++pos_;
      while (!check("}")) {
        auto arg = open(NodeKind::NamedArgument);
        arg.children.push_back(leaf(NodeKind::Name, expect_identifier()));
        expect(":");
        arg.children.push_back(parse_expression());
        call.children.push_back(close(arg));
        if (!accept(",")) break;
      }
      expect("}");
    } else if (!check(")")) {
      do {
        call.children.push_back(parse_expression());
      } while (accept(","));
    }
    expect(")");
  }

  AstNode parse_primary() {
    const auto& t = peek();
    if (at_end()) throw ParseError("expected expression but found end of input", here());
    switch (t.kind) {
      case TokenKind::Identifier:
        ++pos_;
        return leaf(NodeKind::IdentifierExpr, t);
      case TokenKind::NumberLiteral: {
        auto n = leaf(NodeKind::LiteralExpr, t);
        ++pos_;
        if (check_kind(TokenKind::Keyword) &&
            std::find(kUnits.begin(), kUnits.end(), peek().lexeme) != kUnits.end()) {
          n.span.end = tokens_[pos_++].span().end;
        }
        return n;
      }
      case TokenKind::StringLiteral:
      case TokenKind::HexLiteral:
      case TokenKind::AddressLiteral:
        ++pos_;
        return leaf(NodeKind::LiteralExpr, t);
      case TokenKind::Keyword:
        if (t.lexeme == "true" || t.lexeme == "false") {
          ++pos_;
          return leaf(NodeKind::LiteralExpr, t);
        }
        if (t.lexeme == "new") {
          auto n = open(NodeKind::NewExpr);
          ++pos_;
          n.children.push_back(parse_type());
          return close(n);
        }
        if (is_elementary_type(t.lexeme) || t.lexeme == "payable") {
          // Type conversions such as `address(x)`, or `uint[]` in `new`.
          ++pos_;
          auto n = leaf(NodeKind::IdentifierExpr, t);
          if (t.lexeme == "address" && check("payable")) ++pos_;
          return n;
        }
        break;
      case TokenKind::Punctuator:
        if (t.lexeme == "(" || t.lexeme == "[") return parse_tuple();
        break;
      default:
        break;
    }
    throw ParseError("expected expression but found " + describe(), here());
  }

  AstNode parse_tuple() {
    bool bracket = check("[");
    std::string_view closing = bracket ? "]" : ")";
    auto n = open(NodeKind::TupleExpr);
    ++pos_;
    bool comma = false;
    while (!check(closing)) {
      if (!check(",")) n.children.push_back(parse_expression());
      if (!accept(",")) break;
      comma = true;
    }
    expect(closing);
    if (!bracket && !comma && n.children.size() == 1) {
      // Plain parentheses do not produce a node.
      return std::move(n.children.front());
    }
    return close(n);
  }

  std::vector<LexToken> tokens_;
  std::vector<Diagnostic> diagnostics_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

bool ParseResult::has_errors() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParseResult parse(std::string_view text) { return Parser(tokenize(text)).run(); }

ParseResult parse(const SourceUnit& unit) { return parse(unit.text); }

}  // namespace solembed
