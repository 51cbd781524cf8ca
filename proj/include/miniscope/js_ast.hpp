#pragma once

/// Script parser over a bounded MiniApp JavaScript subset.
///
/// Parsed precisely: import/require, Page/App/Component registration
/// object literals, function and method definitions (including arrows),
/// this.* and member chains, calls, setData, string/number literals,
/// assignments, object/array literals, return, and if/else blocks.
/// Everything else degrades to kind=Other subtrees whose source text is
/// preserved and whose bracketed children are still parsed, so traversal
/// remains complete. The only hard failure is unbalanced brackets.
///
/// Node ids are preorder indices; a subtree occupies the contiguous id
/// range [id, subtree_end). Edges are labeled by the child's syntactic
/// role and always form a tree: |edges| == |nodes| - 1.

#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "miniscope/common.hpp"

namespace miniscope {

enum class AstKind {
  Program,
  ImportDeclaration,
  VariableDeclarator,
  CallExpression,
  MemberExpression,
  ThisExpression,
  FunctionDef,
  ObjectLiteral,
  Property,
  Identifier,
  StringLiteral,
  NumberLiteral,
  Assignment,
  Return,
  Block,
  Other,
};

inline const char* to_string(AstKind k) {
  switch (k) {
    case AstKind::Program: return "Program";
    case AstKind::ImportDeclaration: return "ImportDeclaration";
    case AstKind::VariableDeclarator: return "VariableDeclarator";
    case AstKind::CallExpression: return "CallExpression";
    case AstKind::MemberExpression: return "MemberExpression";
    case AstKind::ThisExpression: return "ThisExpression";
    case AstKind::FunctionDef: return "FunctionDef";
    case AstKind::ObjectLiteral: return "ObjectLiteral";
    case AstKind::Property: return "Property";
    case AstKind::Identifier: return "Identifier";
    case AstKind::StringLiteral: return "StringLiteral";
    case AstKind::NumberLiteral: return "NumberLiteral";
    case AstKind::Assignment: return "Assignment";
    case AstKind::Return: return "Return";
    case AstKind::Block: return "Block";
    case AstKind::Other: return "Other";
  }
  return "?";
}

// Syntactic role of a child relative to its parent; the edge label.
enum class AstRole {
  Statement,
  Specifier,
  Source,
  Id,
  Init,
  Callee,
  Argument,
  Object,
  Property,
  Key,
  Value,
  Param,
  Body,
  Condition,
  Then,
  Else,
  Element,
  Operand,
  Left,
  Right,
  ReturnValue,
};

inline const char* to_string(AstRole r) {
  switch (r) {
    case AstRole::Statement: return "statement";
    case AstRole::Specifier: return "specifier";
    case AstRole::Source: return "source";
    case AstRole::Id: return "id";
    case AstRole::Init: return "init";
    case AstRole::Callee: return "callee";
    case AstRole::Argument: return "argument";
    case AstRole::Object: return "object";
    case AstRole::Property: return "property";
    case AstRole::Key: return "key";
    case AstRole::Value: return "value";
    case AstRole::Param: return "param";
    case AstRole::Body: return "body";
    case AstRole::Condition: return "condition";
    case AstRole::Then: return "then";
    case AstRole::Else: return "else";
    case AstRole::Element: return "element";
    case AstRole::Operand: return "operand";
    case AstRole::Left: return "left";
    case AstRole::Right: return "right";
    case AstRole::ReturnValue: return "return-value";
  }
  return "?";
}

// Operator/operand partition: composite constructs are operators, leaves
// that name or hold a value are operands.
enum class NodeProp { Operator, Operand };

inline NodeProp node_prop(AstKind k) {
  switch (k) {
    case AstKind::Identifier:
    case AstKind::StringLiteral:
    case AstKind::NumberLiteral:
    case AstKind::ThisExpression:
      return NodeProp::Operand;
    default:
      return NodeProp::Operator;
  }
}

struct AstChild {
  AstRole role;
  int id;

  bool operator==(const AstChild&) const = default;
};

struct AstNode {
  int id = -1;
  AstKind kind = AstKind::Other;
  Span span;
  std::string text;       // source slice
  std::string str_value;  // Identifier name / literal value / FunctionDef name
  std::vector<AstChild> children;
  int subtree_end = -1;   // one past the last descendant id
};

struct AstEdge {
  int parent;
  int child;
  AstRole role;

  bool operator==(const AstEdge&) const = default;
};

struct AstGraph {
  std::string file;
  std::vector<AstNode> nodes;
  std::vector<AstEdge> edges;
  std::vector<int> parent;  // parent id per node, -1 for the root
  Diagnostics diagnostics;

  const AstNode& node(int id) const { return nodes[static_cast<size_t>(id)]; }
  int root() const { return 0; }

  const AstNode* child(const AstNode& n, AstRole role) const {
    for (const AstChild& c : n.children)
      if (c.role == role) return &node(c.id);
    return nullptr;
  }

  std::vector<const AstNode*> children_of(const AstNode& n, AstRole role) const {
    std::vector<const AstNode*> out;
    for (const AstChild& c : n.children)
      if (c.role == role) out.push_back(&node(c.id));
    return out;
  }

  bool in_subtree(int node_id, int ancestor) const {
    return node_id >= ancestor && node_id < nodes[static_cast<size_t>(ancestor)].subtree_end;
  }

  // Nearest enclosing FunctionDef of `id`, or -1 when at module level.
  int enclosing_function(int id) const {
    for (int p = parent[static_cast<size_t>(id)]; p >= 0; p = parent[static_cast<size_t>(p)])
      if (node(p).kind == AstKind::FunctionDef) return p;
    return -1;
  }
};

namespace detail {

struct Token {
  enum Kind { Ident, Keyword, String, Number, Template, Punct, End } kind = End;
  std::string text;   // raw token text (with quotes for strings)
  std::string value;  // unescaped value for strings
  size_t begin = 0, end = 0;
  int line = 1, col = 1;
};

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

inline const std::set<std::string>& js_keywords() {
  static const std::set<std::string> kw = {
      "break",  "case",  "catch", "class",  "const",    "continue", "default", "delete",
      "do",     "else",  "export", "extends", "finally", "for",      "function", "if",
      "import", "in",    "instanceof", "let", "new",     "of",       "return",  "super",
      "switch", "this",  "throw", "try",     "typeof",   "var",      "void",    "while",
      "with",   "yield", "true",  "false",   "null",     "undefined", "await",  "async",
      "from",   "as",
  };
  return kw;
}

class JsLexer {
 public:
  explicit JsLexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(const std::string& file) {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t = next_token();
      bool end = t.kind == Token::End;
      out.push_back(std::move(t));
      if (end) break;
    }
    check_balance(out, file);
    return out;
  }

 private:
  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  bool eof() const { return pos_ >= src_.size(); }
  char peek(size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
    ++pos_;
  }

  void skip_trivia() {
    while (!eof()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance(); advance();
        while (!eof() && !(peek() == '*' && peek(1) == '/')) advance();
        if (!eof()) { advance(); advance(); }
      } else {
        break;
      }
    }
  }

  Token next_token() {
    Token t;
    t.begin = pos_;
    t.line = line_;
    t.col = col_;
    if (eof()) { t.kind = Token::End; t.end = pos_; return t; }
    char c = peek();
    if (is_ident_start(c)) {
      while (!eof() && is_ident_char(peek())) advance();
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      t.kind = js_keywords().count(t.text) ? Token::Keyword : Token::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number();
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      t.kind = Token::Number;
    } else if (c == '"' || c == '\'') {
      t.value = lex_string(c);
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      t.kind = Token::String;
    } else if (c == '`') {
      t.value = lex_string('`');
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      t.kind = Token::Template;
    } else {
      lex_punct();
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      t.kind = Token::Punct;
    }
    t.end = pos_;
    return t;
  }

  void lex_number() {
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance(); advance();
      while (!eof() && std::isxdigit(static_cast<unsigned char>(peek()))) advance();
      return;
    }
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    if (peek() == '.') {
      advance();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      advance();
      if (peek() == '+' || peek() == '-') advance();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
  }

  std::string lex_string(char quote) {
    std::string value;
    advance();  // opening quote
    while (!eof() && peek() != quote) {
      if (peek() == '\\') {
        advance();
        if (eof()) break;
        char e = peek();
        switch (e) {
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          case 'r': value.push_back('\r'); break;
          default: value.push_back(e); break;
        }
        advance();
      } else {
        value.push_back(peek());
        advance();
      }
    }
    if (!eof()) advance();  // closing quote
    return value;
  }

  void lex_punct() {
    static const std::vector<std::string> multi = {
        ">>>=", "===", "!==", ">>>", "**=", "...", "<<=", ">>=", "=>", "==", "!=",
        "<=",   ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",  "+=", "-=", "*=",
        "/=",   "%=",  "&=",  "|=",  "^=",  "<<",  ">>",  "**",
    };
    for (const std::string& m : multi) {
      if (src_.substr(pos_).starts_with(m)) {
        for (size_t i = 0; i < m.size(); ++i) advance();
        return;
      }
    }
    advance();
  }

  static void check_balance(const std::vector<Token>& toks, const std::string& file) {
    std::vector<char> stack;
    for (const Token& t : toks) {
      if (t.kind != Token::Punct || t.text.size() != 1) continue;
      char c = t.text[0];
      if (c == '(' || c == '[' || c == '{') {
        stack.push_back(c);
      } else if (c == ')' || c == ']' || c == '}') {
        char open = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (stack.empty() || stack.back() != open)
          throw Error(ErrorCode::ParseError,
                      file + ":" + std::to_string(t.line) + ": unbalanced '" + t.text + "'");
        stack.pop_back();
      }
    }
    if (!stack.empty())
      throw Error(ErrorCode::ParseError,
                  file + ": unclosed '" + std::string(1, stack.back()) + "' at end of input");
  }
};

// Parser-side tree; flattened to AstGraph preorder after the parse.
struct TempNode {
  AstKind kind = AstKind::Other;
  size_t begin = 0, end = 0;
  std::string str_value;
  std::vector<std::pair<AstRole, std::unique_ptr<TempNode>>> children;

  TempNode* add(AstRole role, std::unique_ptr<TempNode> child) {
    children.emplace_back(role, std::move(child));
    return children.back().second.get();
  }
};

class JsParser {
 public:
  JsParser(std::string_view src, std::string file)
      : src_(src), file_(std::move(file)), toks_(JsLexer(src).run(file_)) {}

  AstGraph run() {
    auto program = std::make_unique<TempNode>();
    program->kind = AstKind::Program;
    program->begin = 0;
    program->end = src_.size();
    while (!at_end()) {
      size_t before = idx_;
      auto stmt = parse_statement();
      if (stmt) program->add(AstRole::Statement, std::move(stmt));
      if (idx_ == before) ++idx_;  // never stall on unexpected input
    }
    return flatten(std::move(program));
  }

 private:
  std::string_view src_;
  std::string file_;
  std::vector<Token> toks_;
  size_t idx_ = 0;
  Diagnostics diags_;

  using NodePtr = std::unique_ptr<TempNode>;

  const Token& cur() const { return toks_[idx_]; }
  const Token& la(size_t n = 1) const {
    size_t i = idx_ + n;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at_end() const { return cur().kind == Token::End; }
  bool is_punct(std::string_view p) const { return cur().kind == Token::Punct && cur().text == p; }
  bool is_kw(std::string_view k) const { return cur().kind == Token::Keyword && cur().text == k; }

  Token take() { return toks_[idx_++]; }
  bool accept_punct(std::string_view p) {
    if (is_punct(p)) { ++idx_; return true; }
    return false;
  }

  NodePtr make(AstKind kind, size_t begin) {
    auto n = std::make_unique<TempNode>();
    n->kind = kind;
    n->begin = begin;
    n->end = begin;
    return n;
  }

  NodePtr leaf(AstKind kind, const Token& t) {
    auto n = make(kind, t.begin);
    n->end = t.end;
    if (kind == AstKind::StringLiteral) n->str_value = t.value;
    else n->str_value = t.text;
    return n;
  }

  void close(TempNode& n) { n.end = idx_ > 0 ? toks_[idx_ - 1].end : 0; }

  // ---- statements ----

  NodePtr parse_statement() {
    if (accept_punct(";")) return nullptr;
    if (is_kw("import")) return parse_import();
    if (is_kw("export")) { ++idx_; if (is_kw("default")) ++idx_; return parse_statement(); }
    if (is_kw("const") || is_kw("let") || is_kw("var")) return parse_var_statement();
    if (is_kw("function")) return parse_function(/*require_name=*/true);
    if (is_kw("return")) return parse_return();
    if (is_kw("if")) return parse_if();
    if (is_punct("{")) return parse_block();
    if (is_kw("for") || is_kw("while") || is_kw("do") || is_kw("switch") || is_kw("try") ||
        is_kw("throw") || is_kw("class") || is_kw("break") || is_kw("continue") ||
        is_kw("with") || is_kw("catch") || is_kw("finally") || is_kw("case") ||
        is_kw("default") || is_kw("async"))
      return parse_opaque_statement();
    NodePtr expr = parse_expression();
    accept_punct(";");
    return expr;
  }

  NodePtr parse_import() {
    auto node = make(AstKind::ImportDeclaration, cur().begin);
    ++idx_;  // import
    if (cur().kind == Token::String) {
      node->add(AstRole::Source, leaf(AstKind::StringLiteral, take()));
    } else {
      bool expect_from = false;
      if (cur().kind == Token::Ident) {  // default import
        node->add(AstRole::Specifier, leaf(AstKind::Identifier, take()));
        expect_from = true;
        accept_punct(",");
      }
      if (accept_punct("*")) {  // namespace import
        if (is_kw("as")) ++idx_;
        if (cur().kind == Token::Ident)
          node->add(AstRole::Specifier, leaf(AstKind::Identifier, take()));
        expect_from = true;
      } else if (accept_punct("{")) {
        while (!at_end() && !is_punct("}")) {
          if (cur().kind == Token::Ident || cur().kind == Token::Keyword) {
            Token name = take();
            if (is_kw("as") && (la().kind == Token::Ident)) {
              ++idx_;
              name = take();  // bind the local alias
            }
            node->add(AstRole::Specifier, leaf(AstKind::Identifier, name));
          } else {
            ++idx_;
          }
          accept_punct(",");
        }
        accept_punct("}");
        expect_from = true;
      }
      if (expect_from && is_kw("from")) ++idx_;
      if (cur().kind == Token::String)
        node->add(AstRole::Source, leaf(AstKind::StringLiteral, take()));
    }
    accept_punct(";");
    close(*node);
    return node;
  }

  // A const/let/var statement yields its declarators directly; a single
  // declarator is returned bare, several are grouped under a Block-less
  // wrapper (Other) to keep the statement list flat and faithful.
  NodePtr parse_var_statement() {
    size_t begin = cur().begin;
    ++idx_;  // const/let/var
    std::vector<NodePtr> decls;
    while (!at_end()) {
      auto decl = make(AstKind::VariableDeclarator, cur().begin);
      if (cur().kind == Token::Ident) {
        decl->add(AstRole::Id, leaf(AstKind::Identifier, take()));
      } else if (is_punct("{") || is_punct("[")) {
        decl->add(AstRole::Id, parse_primary());  // destructuring pattern, kept opaque
      } else {
        break;
      }
      if (accept_punct("=")) decl->add(AstRole::Init, parse_assignment_expr());
      close(*decl);
      decls.push_back(std::move(decl));
      if (!accept_punct(",")) break;
    }
    accept_punct(";");
    if (decls.size() == 1) return std::move(decls.front());
    auto group = make(AstKind::Other, begin);
    for (auto& d : decls) group->add(AstRole::Statement, std::move(d));
    close(*group);
    return group;
  }

  NodePtr parse_function(bool require_name) {
    auto fn = make(AstKind::FunctionDef, cur().begin);
    ++idx_;  // function
    if (cur().kind == Token::Ident) fn->str_value = take().text;
    else if (require_name) fn->str_value = "";
    parse_params_into(*fn);
    if (is_punct("{")) fn->add(AstRole::Body, parse_block());
    close(*fn);
    return fn;
  }

  void parse_params_into(TempNode& fn) {
    if (!accept_punct("(")) return;
    while (!at_end() && !is_punct(")")) {
      if (cur().kind == Token::Ident) {
        fn.add(AstRole::Param, leaf(AstKind::Identifier, take()));
        if (accept_punct("=")) parse_assignment_expr();  // default value, dropped
      } else if (is_punct("{") || is_punct("[")) {
        fn.add(AstRole::Param, parse_primary());  // destructuring param, opaque
      } else {
        ++idx_;
      }
      accept_punct(",");
    }
    accept_punct(")");
  }

  NodePtr parse_return() {
    auto node = make(AstKind::Return, cur().begin);
    Token ret = take();
    bool has_value = !at_end() && !is_punct(";") && !is_punct("}") && cur().line == ret.line;
    if (has_value) node->add(AstRole::ReturnValue, parse_expression());
    accept_punct(";");
    close(*node);
    return node;
  }

  NodePtr parse_if() {
    auto node = make(AstKind::Other, cur().begin);
    node->str_value = "if";
    ++idx_;  // if
    if (accept_punct("(")) {
      node->add(AstRole::Condition, parse_expression());
      accept_punct(")");
    }
    if (auto then = parse_statement()) node->add(AstRole::Then, std::move(then));
    if (is_kw("else")) {
      ++idx_;
      if (auto els = parse_statement()) node->add(AstRole::Else, std::move(els));
    }
    close(*node);
    return node;
  }

  NodePtr parse_block() {
    auto node = make(AstKind::Block, cur().begin);
    accept_punct("{");
    while (!at_end() && !is_punct("}")) {
      size_t before = idx_;
      auto stmt = parse_statement();
      if (stmt) node->add(AstRole::Statement, std::move(stmt));
      if (idx_ == before) ++idx_;
    }
    accept_punct("}");
    close(*node);
    return node;
  }

  // Unsupported statement: consume to the end of the construct, parsing
  // any nested { } as real blocks so calls inside loops stay visible.
  NodePtr parse_opaque_statement() {
    auto node = make(AstKind::Other, cur().begin);
    node->str_value = cur().text;
    ++idx_;
    int paren_depth = 0;
    bool saw_block = false;
    while (!at_end()) {
      if (is_punct("(") || is_punct("[")) { ++paren_depth; ++idx_; continue; }
      if (is_punct(")") || is_punct("]")) {
        if (paren_depth == 0) break;
        --paren_depth; ++idx_; continue;
      }
      if (paren_depth == 0) {
        if (is_punct("{")) {
          node->add(AstRole::Body, parse_block());
          saw_block = true;
          // `else`, `catch`, `finally`, `while` chain the construct on.
          if (is_kw("else") || is_kw("catch") || is_kw("finally") || is_kw("while")) {
            node->str_value += "+" + cur().text;
            ++idx_;
            saw_block = false;
            continue;
          }
          break;
        }
        if (is_punct(";")) { ++idx_; break; }
        if (is_punct("}")) break;
      }
      ++idx_;
      (void)saw_block;
    }
    close(*node);
    return node;
  }

  // ---- expressions ----

  NodePtr parse_expression() { return parse_assignment_expr(); }

  NodePtr parse_assignment_expr() {
    size_t begin = cur().begin;
    NodePtr left = parse_conditional();
    if (is_punct("=")) {
      ++idx_;
      auto node = make(AstKind::Assignment, begin);
      node->add(AstRole::Left, std::move(left));
      node->add(AstRole::Right, parse_assignment_expr());
      close(*node);
      return node;
    }
    static const std::set<std::string> compound = {"+=", "-=", "*=", "/=", "%=",
                                                   "&=", "|=", "^=", "<<=", ">>=", "**="};
    if (cur().kind == Token::Punct && compound.count(cur().text)) {
      auto node = make(AstKind::Other, begin);
      node->str_value = cur().text;
      ++idx_;
      node->add(AstRole::Operand, std::move(left));
      node->add(AstRole::Operand, parse_assignment_expr());
      close(*node);
      return node;
    }
    return left;
  }

  NodePtr parse_conditional() {
    size_t begin = cur().begin;
    NodePtr cond = parse_binary();
    if (!is_punct("?")) return cond;
    ++idx_;
    auto node = make(AstKind::Other, begin);
    node->str_value = "?:";
    node->add(AstRole::Operand, std::move(cond));
    node->add(AstRole::Operand, parse_assignment_expr());
    accept_punct(":");
    node->add(AstRole::Operand, parse_assignment_expr());
    close(*node);
    return node;
  }

  bool at_binary_op() const {
    static const std::set<std::string> ops = {"+",  "-",  "*",  "/",  "%",  "**", "==", "!=",
                                              "===", "!==", "<", ">",  "<=", ">=", "&&", "||",
                                              "??", "&",  "|",  "^",  "<<", ">>", ">>>"};
    if (cur().kind == Token::Punct && ops.count(cur().text)) return true;
    return is_kw("instanceof") || is_kw("in") || is_kw("of");
  }

  // Binary chains are outside the precise subset: they fold into one
  // Other node whose operands stay fully parsed.
  NodePtr parse_binary() {
    size_t begin = cur().begin;
    NodePtr first = parse_unary();
    if (!at_binary_op()) return first;
    auto node = make(AstKind::Other, begin);
    node->str_value = "binary";
    node->add(AstRole::Operand, std::move(first));
    while (at_binary_op()) {
      ++idx_;
      node->add(AstRole::Operand, parse_unary());
    }
    close(*node);
    return node;
  }

  NodePtr parse_unary() {
    if (is_punct("!") || is_punct("~") || is_punct("+") || is_punct("-") || is_punct("++") ||
        is_punct("--") || is_punct("...") || is_kw("typeof") || is_kw("void") ||
        is_kw("delete") || is_kw("new") || is_kw("await")) {
      auto node = make(AstKind::Other, cur().begin);
      node->str_value = cur().text;
      ++idx_;
      node->add(AstRole::Operand, parse_unary());
      close(*node);
      return node;
    }
    return parse_postfix();
  }

  NodePtr parse_postfix() {
    size_t begin = cur().begin;
    NodePtr node = parse_primary();
    while (!at_end()) {
      if (is_punct(".") || is_punct("?.")) {
        ++idx_;
        auto member = make(AstKind::MemberExpression, begin);
        member->add(AstRole::Object, std::move(node));
        if (cur().kind == Token::Ident || cur().kind == Token::Keyword)
          member->add(AstRole::Property, leaf(AstKind::Identifier, take()));
        close(*member);
        node = std::move(member);
      } else if (is_punct("[")) {
        ++idx_;
        auto member = make(AstKind::MemberExpression, begin);
        member->str_value = "computed";
        member->add(AstRole::Object, std::move(node));
        if (!is_punct("]")) member->add(AstRole::Property, parse_expression());
        accept_punct("]");
        close(*member);
        node = std::move(member);
      } else if (is_punct("(")) {
        ++idx_;
        auto call = make(AstKind::CallExpression, begin);
        call->add(AstRole::Callee, std::move(node));
        while (!at_end() && !is_punct(")")) {
          call->add(AstRole::Argument, parse_assignment_expr());
          if (!accept_punct(",")) break;
        }
        accept_punct(")");
        close(*call);
        node = std::move(call);
      } else if (is_punct("++") || is_punct("--")) {
        auto post = make(AstKind::Other, begin);
        post->str_value = cur().text;
        ++idx_;
        post->add(AstRole::Operand, std::move(node));
        close(*post);
        node = std::move(post);
      } else {
        break;
      }
    }
    return node;
  }

  // Decides whether '(' begins arrow-function params by scanning to the
  // matching ')' and checking for '=>'.
  bool paren_starts_arrow() const {
    int depth = 0;
    for (size_t i = idx_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == Token::Punct) {
        if (t.text == "(") ++depth;
        else if (t.text == ")") {
          if (--depth == 0) return i + 1 < toks_.size() && toks_[i + 1].text == "=>";
        }
      } else if (t.kind == Token::End) {
        return false;
      }
    }
    return false;
  }

  NodePtr parse_arrow_body(TempNode& fn) {
    ++idx_;  // =>
    if (is_punct("{")) fn.add(AstRole::Body, parse_block());
    else fn.add(AstRole::Body, parse_assignment_expr());
    return nullptr;
  }

  NodePtr parse_primary() {
    if (at_end()) {
      auto empty = make(AstKind::Other, src_.size());
      empty->str_value = "<eof>";
      return empty;
    }
    const Token& t = cur();
    if (t.kind == Token::Ident) {
      if (la().kind == Token::Punct && la().text == "=>") {  // x => ...
        auto fn = make(AstKind::FunctionDef, t.begin);
        fn->add(AstRole::Param, leaf(AstKind::Identifier, take()));
        parse_arrow_body(*fn);
        close(*fn);
        return fn;
      }
      return leaf(AstKind::Identifier, take());
    }
    if (t.kind == Token::String) return leaf(AstKind::StringLiteral, take());
    if (t.kind == Token::Number) return leaf(AstKind::NumberLiteral, take());
    if (t.kind == Token::Template) {
      Token tpl = take();
      if (tpl.value.find("${") == std::string::npos) return leaf(AstKind::StringLiteral, tpl);
      auto other = leaf(AstKind::Other, tpl);
      other->str_value = "template";
      return other;
    }
    if (t.kind == Token::Keyword) {
      if (t.text == "this") return leaf(AstKind::ThisExpression, take());
      if (t.text == "function") return parse_function(/*require_name=*/false);
      if (t.text == "async") { ++idx_; return parse_primary(); }
      if (t.text == "true" || t.text == "false" || t.text == "null" || t.text == "undefined")
        return leaf(AstKind::Identifier, take());
      // Keyword in expression position outside the subset.
      auto other = leaf(AstKind::Other, take());
      return other;
    }
    if (is_punct("(")) {
      if (paren_starts_arrow()) {
        auto fn = make(AstKind::FunctionDef, t.begin);
        parse_params_into(*fn);
        parse_arrow_body(*fn);
        close(*fn);
        return fn;
      }
      ++idx_;
      NodePtr inner = parse_expression();
      accept_punct(")");
      return inner;
    }
    if (is_punct("{")) return parse_object_literal();
    if (is_punct("[")) {
      auto arr = make(AstKind::Other, t.begin);
      arr->str_value = "array";
      ++idx_;
      while (!at_end() && !is_punct("]")) {
        arr->add(AstRole::Element, parse_assignment_expr());
        if (!accept_punct(",")) break;
      }
      accept_punct("]");
      close(*arr);
      return arr;
    }
    // Unknown punctuation: single opaque leaf, guaranteed progress.
    return leaf(AstKind::Other, take());
  }

  NodePtr parse_object_literal() {
    auto obj = make(AstKind::ObjectLiteral, cur().begin);
    accept_punct("{");
    while (!at_end() && !is_punct("}")) {
      if (is_punct(",")) { ++idx_; continue; }
      auto prop = make(AstKind::Property, cur().begin);
      if (is_punct("...")) {
        ++idx_;
        prop->kind = AstKind::Other;
        prop->str_value = "spread";
        prop->add(AstRole::Operand, parse_assignment_expr());
        close(*prop);
        obj->add(AstRole::Property, std::move(prop));
        continue;
      }
      NodePtr key;
      std::string key_name;
      if (cur().kind == Token::Ident || cur().kind == Token::Keyword) {
        Token k = take();
        key_name = k.text;
        key = leaf(AstKind::Identifier, k);
      } else if (cur().kind == Token::String) {
        Token k = take();
        key_name = k.value;
        key = leaf(AstKind::StringLiteral, k);
      } else if (cur().kind == Token::Number) {
        Token k = take();
        key_name = k.text;
        key = leaf(AstKind::NumberLiteral, k);
      } else if (is_punct("[")) {
        ++idx_;
        key = parse_expression();
        accept_punct("]");
        key_name = "<computed>";
      } else {
        ++idx_;
        continue;
      }
      prop->str_value = key_name;
      prop->add(AstRole::Key, std::move(key));
      if (accept_punct(":")) {
        prop->add(AstRole::Value, parse_assignment_expr());
      } else if (is_punct("(")) {  // method shorthand
        auto fn = make(AstKind::FunctionDef, prop->children.back().second->begin);
        fn->str_value = key_name;
        parse_params_into(*fn);
        if (is_punct("{")) fn->add(AstRole::Body, parse_block());
        close(*fn);
        prop->add(AstRole::Value, std::move(fn));
      } else {  // shorthand {name}
        auto value = make(AstKind::Identifier, prop->children.back().second->begin);
        value->end = prop->children.back().second->end;
        value->str_value = key_name;
        prop->add(AstRole::Value, std::move(value));
      }
      close(*prop);
      obj->add(AstRole::Property, std::move(prop));
    }
    accept_punct("}");
    close(*obj);
    return obj;
  }

  // ---- flatten to preorder ----

  AstGraph flatten(NodePtr root) {
    AstGraph g;
    g.file = file_;
    g.diagnostics = std::move(diags_);
    flatten_node(g, *root, -1, AstRole::Statement);
    for (const AstNode& n : g.nodes)
      for (const AstChild& c : n.children) g.edges.push_back({n.id, c.id, c.role});
    return g;
  }

  int flatten_node(AstGraph& g, const TempNode& t, int parent, AstRole role) {
    (void)role;
    int id = static_cast<int>(g.nodes.size());
    AstNode n;
    n.id = id;
    n.kind = t.kind;
    n.str_value = t.str_value;
    n.span = make_span(t.begin, t.end);
    n.text = std::string(src_.substr(t.begin, t.end >= t.begin ? t.end - t.begin : 0));
    g.nodes.push_back(std::move(n));
    g.parent.push_back(parent);
    for (const auto& [child_role, child] : t.children) {
      int cid = flatten_node(g, *child, id, child_role);
      g.nodes[static_cast<size_t>(id)].children.push_back({child_role, cid});
    }
    g.nodes[static_cast<size_t>(id)].subtree_end = static_cast<int>(g.nodes.size());
    return id;
  }

  Span make_span(size_t begin, size_t end) const {
    Span s;
    s.begin = begin;
    s.end = end < begin ? begin : end;
    int line = 1, col = 1;
    for (size_t i = 0; i < begin && i < src_.size(); ++i) {
      if (src_[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    s.line = line;
    s.col = col;
    for (size_t i = begin; i < s.end && i < src_.size(); ++i) {
      if (src_[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    s.end_line = line;
    s.end_col = col;
    return s;
  }
};

}  // namespace detail

inline AstGraph parse_js(std::string_view source, const std::string& file) {
  return detail::JsParser(source, file).run();
}

// ---- structural helpers used by the graph builders ----

// Dotted text of an identifier/member chain: "wx.navigateTo",
// "this.data.x", "res.tempImagePath". Empty when the expression is not a
// plain non-computed chain.
inline std::string member_path(const AstGraph& g, int id) {
  const AstNode& n = g.node(id);
  switch (n.kind) {
    case AstKind::Identifier: return n.str_value;
    case AstKind::ThisExpression: return "this";
    case AstKind::MemberExpression: {
      if (n.str_value == "computed") return "";
      const AstNode* obj = g.child(n, AstRole::Object);
      const AstNode* prop = g.child(n, AstRole::Property);
      if (!obj || !prop || prop->kind != AstKind::Identifier) return "";
      std::string base = member_path(g, obj->id);
      if (base.empty()) return "";
      return base + "." + prop->str_value;
    }
    default: return "";
  }
}

// Registration object of Page({...}) / App({...}) / Component({...}).
struct RegistrationObject {
  std::string registrar;  // "Page", "App" or "Component"
  int call_node = -1;
  int object_node = -1;   // the ObjectLiteral argument
};

inline std::optional<RegistrationObject> find_registration(const AstGraph& g) {
  for (const AstNode& n : g.nodes) {
    if (n.kind != AstKind::CallExpression) continue;
    const AstNode* callee = g.child(n, AstRole::Callee);
    if (!callee || callee->kind != AstKind::Identifier) continue;
    if (callee->str_value != "Page" && callee->str_value != "App" &&
        callee->str_value != "Component")
      continue;
    for (const AstNode* arg : g.children_of(n, AstRole::Argument)) {
      if (arg->kind == AstKind::ObjectLiteral)
        return RegistrationObject{callee->str_value, n.id, arg->id};
    }
  }
  return std::nullopt;
}

// Named function definitions discoverable in a module: declarations,
// object-literal methods/properties holding functions, and assignments of
// function expressions to a member or identifier. First definition of a
// name wins.
struct NamedFunction {
  std::string name;
  int fn_node;
  std::vector<std::string> params;
};

inline std::vector<std::string> function_params(const AstGraph& g, int fn_id) {
  std::vector<std::string> out;
  for (const AstNode* p : g.children_of(g.node(fn_id), AstRole::Param))
    if (p->kind == AstKind::Identifier) out.push_back(p->str_value);
    else out.push_back("");
  return out;
}

inline std::vector<NamedFunction> named_functions(const AstGraph& g) {
  std::vector<NamedFunction> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& name, int fn_id) {
    if (name.empty() || seen.count(name)) return;
    seen.insert(name);
    out.push_back({name, fn_id, function_params(g, fn_id)});
  };
  for (const AstNode& n : g.nodes) {
    if (n.kind == AstKind::FunctionDef && !n.str_value.empty()) {
      add(n.str_value, n.id);
      continue;
    }
    if (n.kind == AstKind::Property) {
      const AstNode* value = g.child(n, AstRole::Value);
      if (value && value->kind == AstKind::FunctionDef) add(n.str_value, value->id);
      if (value && value->kind == AstKind::Identifier) {
        // module.exports = { init: init } — resolve the alias later via
        // the function-declaration pass above; nothing to do here.
      }
      continue;
    }
    if (n.kind == AstKind::Assignment) {
      const AstNode* left = g.child(n, AstRole::Left);
      const AstNode* right = g.child(n, AstRole::Right);
      if (!left || !right || right->kind != AstKind::FunctionDef) continue;
      std::string path = member_path(g, left->id);
      if (path.empty()) continue;
      auto segs = split(path, '.');
      add(segs.back(), right->id);
      continue;
    }
    if (n.kind == AstKind::VariableDeclarator) {
      const AstNode* id = g.child(n, AstRole::Id);
      const AstNode* init = g.child(n, AstRole::Init);
      if (id && init && id->kind == AstKind::Identifier && init->kind == AstKind::FunctionDef)
        add(id->str_value, init->id);
    }
  }
  return out;
}

}  // namespace miniscope
