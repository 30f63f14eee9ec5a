#include <array>

#include "solembed/ast.hpp"

namespace solembed {
namespace {

constexpr std::array<std::string_view, kNodeKindCount> kKindNames = {
    "SourceUnitNode",
    "PragmaDirective",
    "ImportDirective",
    "ContractDefinition",
    "InheritanceSpecifier",
    "UsingForDirective",
    "FunctionDefinition",
    "ModifierDefinition",
    "ModifierInvocation",
    "StateVariableDeclaration",
    "StructDefinition",
    "EnumDefinition",
    "EventDefinition",
    "ParameterList",
    "Parameter",
    "TypeName",
    "MappingType",
    "ArrayType",
    "Block",
    "IfStatement",
    "ForStatement",
    "WhileStatement",
    "DoWhileStatement",
    "ReturnStatement",
    "ExpressionStatement",
    "VariableDeclarationStatement",
    "EmitStatement",
    "BreakStatement",
    "ContinueStatement",
    "ThrowStatement",
    "UnknownStatement",
    "Assignment",
    "BinaryOp",
    "UnaryOp",
    "ConditionalExpr",
    "FunctionCall",
    "NamedArgument",
    "MemberAccess",
    "IndexAccess",
    "NewExpr",
    "IdentifierExpr",
    "LiteralExpr",
    "TupleExpr",
    "Name",
    "Specifier",
    "Operator",
};

void dump(const AstNode& node, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += to_string(node.kind);
  out += '@';
  out += std::to_string(node.span.start.line);
  out += ':';
  out += std::to_string(node.span.start.col);
  if (node.leaf_lexeme) {
    out += " [";
    out += *node.leaf_lexeme;
    out += ']';
  }
  out += '\n';
  for (const auto& child : node.children) dump(child, depth + 1, out);
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

bool is_statement_kind(NodeKind kind) {
  switch (kind) {
    case NodeKind::IfStatement:
    case NodeKind::ForStatement:
    case NodeKind::WhileStatement:
    case NodeKind::DoWhileStatement:
    case NodeKind::ReturnStatement:
    case NodeKind::ExpressionStatement:
    case NodeKind::VariableDeclarationStatement:
    case NodeKind::EmitStatement:
    case NodeKind::BreakStatement:
    case NodeKind::ContinueStatement:
    case NodeKind::ThrowStatement:
    case NodeKind::UnknownStatement:
      return true;
    default:
      return false;
  }
}

std::optional<std::string_view> AstNode::declared_name() const {
  for (const auto& child : children) {
    if (child.kind == NodeKind::Name && child.leaf_lexeme) return *child.leaf_lexeme;
  }
  return std::nullopt;
}

std::string dump_ast(const AstNode& root) {
  std::string out;
  dump(root, 0, out);
  return out;
}

}  // namespace solembed
