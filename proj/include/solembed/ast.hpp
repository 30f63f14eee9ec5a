#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solembed/source.hpp"

namespace solembed {

// The node-kind catalog. Leaf kinds carry a lexeme; the structural kinds
// carry children only.
enum class NodeKind {
  SourceUnitNode,
  PragmaDirective,
  ImportDirective,
  ContractDefinition,
  InheritanceSpecifier,
  UsingForDirective,
  FunctionDefinition,
  ModifierDefinition,
  ModifierInvocation,
  StateVariableDeclaration,
  StructDefinition,
  EnumDefinition,
  EventDefinition,
  ParameterList,
  Parameter,
  TypeName,
  MappingType,
  ArrayType,
  Block,
  IfStatement,
  ForStatement,
  WhileStatement,
  DoWhileStatement,
  ReturnStatement,
  ExpressionStatement,
  VariableDeclarationStatement,
  EmitStatement,
  BreakStatement,
  ContinueStatement,
  ThrowStatement,
  UnknownStatement,
  Assignment,
  BinaryOp,
  UnaryOp,
  ConditionalExpr,
  FunctionCall,
  NamedArgument,
  MemberAccess,
  IndexAccess,
  NewExpr,
  IdentifierExpr,
  LiteralExpr,
  TupleExpr,
  Name,
  Specifier,
  Operator,
};

inline constexpr int kNodeKindCount = static_cast<int>(NodeKind::Operator) + 1;

std::string_view to_string(NodeKind kind);

/// Statement kinds become statement-granularity fragments. Block is not one.
bool is_statement_kind(NodeKind kind);

struct AstNode {
  NodeKind kind = NodeKind::SourceUnitNode;
  std::vector<AstNode> children;
  Span span;
  std::optional<std::string> leaf_lexeme;

  bool is_leaf() const { return children.empty() && leaf_lexeme.has_value(); }

  /// Lexeme of the first `Name` child, if any (contract, function, ... names).
  std::optional<std::string_view> declared_name() const;

  bool operator==(const AstNode&) const = default;
};

/// Indented `kind@line:col [lexeme]` lines, one node per line.
std::string dump_ast(const AstNode& root);

}  // namespace solembed
