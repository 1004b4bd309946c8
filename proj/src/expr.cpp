#include "carre/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace carre {

namespace {

struct Token {
  enum class Kind {
    Number,
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
    Bad
  };
  Kind kind = Kind::End;
  std::size_t offset = 0;
  double number = 0.0;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    Token tok;
    tok.offset = pos_;
    if (pos_ >= src_.size()) return tok;
    const char c = src_[pos_];
    switch (c) {
      case '+': ++pos_; tok.kind = Token::Kind::Plus; return tok;
      case '-': ++pos_; tok.kind = Token::Kind::Minus; return tok;
      case '*': ++pos_; tok.kind = Token::Kind::Star; return tok;
      case '/': ++pos_; tok.kind = Token::Kind::Slash; return tok;
      case '^': ++pos_; tok.kind = Token::Kind::Caret; return tok;
      case '(': ++pos_; tok.kind = Token::Kind::LParen; return tok;
      case ')': ++pos_; tok.kind = Token::Kind::RParen; return tok;
      case ',': ++pos_; tok.kind = Token::Kind::Comma; return tok;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      return number_token();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        ++pos_;
      tok.kind = Token::Kind::Ident;
      tok.text = std::string(src_.substr(start, pos_ - start));
      return tok;
    }
    ++pos_;
    tok.kind = Token::Kind::Bad;
    tok.text = std::string(1, c);
    return tok;
  }

 private:
  Token number_token() {
    Token tok;
    tok.offset = pos_;
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to a following identifier, not this number
      }
    }
    tok.kind = Token::Kind::Number;
    tok.text = std::string(src_.substr(start, pos_ - start));
    tok.number = std::strtod(tok.text.c_str(), nullptr);
    return tok;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

int builtin_arity(BuiltinFn fn) { return fn == BuiltinFn::Pow ? 2 : 1; }

bool lookup_builtin(const std::string& name, BuiltinFn& out) {
  if (name == "sin") out = BuiltinFn::Sin;
  else if (name == "cos") out = BuiltinFn::Cos;
  else if (name == "exp") out = BuiltinFn::Exp;
  else if (name == "log") out = BuiltinFn::Log;
  else if (name == "tanh") out = BuiltinFn::Tanh;
  else if (name == "sqrt") out = BuiltinFn::Sqrt;
  else if (name == "abs") out = BuiltinFn::Abs;
  else if (name == "pow") out = BuiltinFn::Pow;
  else return false;
  return true;
}

class Parser {
 public:
  Parser(std::string_view src, int dimension, const ParseOptions& options)
      : lexer_(src), dimension_(dimension), options_(options) {
    advance();
  }

  ParseResult run() {
    ParseResult result;
    ExprNode root = parse_expr();
    if (failed_) {
      result.diagnostics = std::move(diagnostics_);
      return result;
    }
    if (current_.kind != Token::Kind::End) {
      error(current_.offset, "unexpected trailing input");
      result.diagnostics = std::move(diagnostics_);
      return result;
    }
    result.ast = std::move(root);
    result.diagnostics = std::move(diagnostics_);
    return result;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  void error(std::size_t offset, std::string message) {
    if (!failed_)
      diagnostics_.push_back(
          {offset, std::move(message), ParseDiagnostic::Severity::Error});
    failed_ = true;
  }

  ExprNode parse_expr() {
    ExprNode lhs = parse_term();
    while (!failed_ && (current_.kind == Token::Kind::Plus ||
                        current_.kind == Token::Kind::Minus)) {
      BinaryOp op = current_.kind == Token::Kind::Plus ? BinaryOp::Add
                                                       : BinaryOp::Sub;
      advance();
      ExprNode rhs = parse_term();
      ExprNode node;
      node.kind = ExprKind::Binary;
      node.binary_op = op;
      node.children.push_back(std::move(lhs));
      node.children.push_back(std::move(rhs));
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprNode parse_term() {
    ExprNode lhs = parse_unary();
    while (!failed_ && (current_.kind == Token::Kind::Star ||
                        current_.kind == Token::Kind::Slash)) {
      BinaryOp op = current_.kind == Token::Kind::Star ? BinaryOp::Mul
                                                       : BinaryOp::Div;
      advance();
      ExprNode rhs = parse_unary();
      ExprNode node;
      node.kind = ExprKind::Binary;
      node.binary_op = op;
      node.children.push_back(std::move(lhs));
      node.children.push_back(std::move(rhs));
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprNode parse_unary() {
    if (current_.kind == Token::Kind::Minus) {
      advance();
      ExprNode node;
      node.kind = ExprKind::Unary;
      node.unary_op = UnaryOp::Negate;
      node.children.push_back(parse_unary());
      return node;
    }
    return parse_power();
  }

  ExprNode parse_power() {
    ExprNode base = parse_atom();
    if (!failed_ && current_.kind == Token::Kind::Caret) {
      advance();
      ExprNode exponent = parse_unary();  // right-associative
      ExprNode node;
      node.kind = ExprKind::Binary;
      node.binary_op = BinaryOp::Pow;
      node.children.push_back(std::move(base));
      node.children.push_back(std::move(exponent));
      return node;
    }
    return base;
  }

  ExprNode parse_atom() {
    ExprNode node;
    switch (current_.kind) {
      case Token::Kind::Number:
        node.kind = ExprKind::Constant;
        node.constant = current_.number;
        advance();
        return node;
      case Token::Kind::Ident:
        return parse_ident();
      case Token::Kind::LParen: {
        const std::size_t open = current_.offset;
        advance();
        node = parse_expr();
        if (failed_) return node;
        if (current_.kind != Token::Kind::RParen) {
          error(open, "unbalanced parenthesis: expected ')'");
          return node;
        }
        advance();
        return node;
      }
      case Token::Kind::End:
        error(current_.offset, "unexpected end of input");
        return node;
      case Token::Kind::Bad:
        error(current_.offset, "unexpected character '" + current_.text + "'");
        return node;
      default:
        error(current_.offset, "expected a value");
        return node;
    }
  }

  ExprNode parse_ident() {
    const Token tok = current_;
    advance();
    ExprNode node;

    if (options_.s_is_x1 && tok.text == "s") {
      node.kind = ExprKind::Variable;
      node.variable = 0;
      return node;
    }
    if (tok.text.size() >= 2 && tok.text[0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(tok.text[1]))) {
      bool all_digits = true;
      for (std::size_t i = 1; i < tok.text.size(); ++i)
        all_digits = all_digits &&
                     std::isdigit(static_cast<unsigned char>(tok.text[i]));
      if (all_digits) {
        const long index = std::strtol(tok.text.c_str() + 1, nullptr, 10);
        if (index < 1 || index > dimension_) {
          error(tok.offset, "variable index out of range: " + tok.text +
                                " (dimension " + std::to_string(dimension_) +
                                ")");
          return node;
        }
        node.kind = ExprKind::Variable;
        node.variable = static_cast<int>(index - 1);
        return node;
      }
    }

    BuiltinFn fn;
    if (!lookup_builtin(tok.text, fn)) {
      error(tok.offset, "unknown identifier '" + tok.text + "'");
      return node;
    }
    if (current_.kind != Token::Kind::LParen) {
      error(current_.offset,
            "expected '(' after function '" + tok.text + "'");
      return node;
    }
    advance();
    node.kind = ExprKind::Call;
    node.call = fn;
    node.children.push_back(parse_expr());
    while (!failed_ && current_.kind == Token::Kind::Comma) {
      advance();
      node.children.push_back(parse_expr());
    }
    if (failed_) return node;
    if (current_.kind != Token::Kind::RParen) {
      error(current_.offset, "unbalanced parenthesis: expected ')'");
      return node;
    }
    advance();
    const int arity = builtin_arity(fn);
    if (static_cast<int>(node.children.size()) != arity) {
      error(tok.offset, "'" + tok.text + "' expects " +
                            std::to_string(arity) + " argument" +
                            (arity == 1 ? "" : "s") + ", got " +
                            std::to_string(node.children.size()));
      return node;
    }
    return node;
  }

  Lexer lexer_;
  Token current_;
  int dimension_;
  ParseOptions options_;
  std::vector<ParseDiagnostic> diagnostics_;
  bool failed_ = false;
};

const char* builtin_name(BuiltinFn fn) {
  switch (fn) {
    case BuiltinFn::Sin: return "sin";
    case BuiltinFn::Cos: return "cos";
    case BuiltinFn::Exp: return "exp";
    case BuiltinFn::Log: return "log";
    case BuiltinFn::Tanh: return "tanh";
    case BuiltinFn::Sqrt: return "sqrt";
    case BuiltinFn::Abs: return "abs";
    case BuiltinFn::Pow: return "pow";
  }
  return "?";
}

int precedence(const ExprNode& node) {
  switch (node.kind) {
    case ExprKind::Binary:
      switch (node.binary_op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
      return 1;
    case ExprKind::Unary: return 3;
    default: return 5;
  }
}

void print_node(const ExprNode& node, int parent_prec, std::string& out) {
  const int prec = precedence(node);
  const bool parens = prec < parent_prec;
  if (parens) out.push_back('(');
  switch (node.kind) {
    case ExprKind::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", node.constant);
      out += buf;
      break;
    }
    case ExprKind::Variable:
      out += "x" + std::to_string(node.variable + 1);
      break;
    case ExprKind::Unary:
      out.push_back('-');
      print_node(node.children[0], 3, out);
      break;
    case ExprKind::Binary: {
      // left-associative ops parenthesize an equal-precedence right child so
      // that printing preserves tree structure, not just value
      const char* op = nullptr;
      int left_prec = prec, right_prec = prec + 1;
      switch (node.binary_op) {
        case BinaryOp::Add: op = " + "; break;
        case BinaryOp::Sub: op = " - "; break;
        case BinaryOp::Mul: op = "*"; break;
        case BinaryOp::Div: op = "/"; break;
        case BinaryOp::Pow: op = "^"; left_prec = prec + 1; right_prec = prec;
          break;
      }
      print_node(node.children[0], left_prec, out);
      out += op;
      print_node(node.children[1], right_prec, out);
      break;
    }
    case ExprKind::Call:
      out += builtin_name(node.call);
      out.push_back('(');
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += ", ";
        print_node(node.children[i], 0, out);
      }
      out.push_back(')');
      break;
  }
  if (parens) out.push_back(')');
}

}  // namespace

ParseResult parse(std::string_view source, int dimension,
                  const ParseOptions& options) {
  ParseResult result;
  if (source.empty()) {
    result.diagnostics.push_back(
        {0, "empty expression", ParseDiagnostic::Severity::Error});
    return result;
  }
  if (dimension < 1) {
    result.diagnostics.push_back(
        {0, "dimension must be positive", ParseDiagnostic::Severity::Error});
    return result;
  }
  Parser parser(source, dimension, options);
  return parser.run();
}

std::string to_string(const ExprNode& node) {
  std::string out;
  print_node(node, 0, out);
  return out;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Constant:
      if (a.constant != b.constant) return false;
      break;
    case ExprKind::Variable:
      if (a.variable != b.variable) return false;
      break;
    case ExprKind::Unary:
      if (a.unary_op != b.unary_op) return false;
      break;
    case ExprKind::Binary:
      if (a.binary_op != b.binary_op) return false;
      break;
    case ExprKind::Call:
      if (a.call != b.call) return false;
      break;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

bool is_constant_expr(const ExprNode& node) {
  if (node.kind == ExprKind::Variable) return false;
  for (const ExprNode& child : node.children)
    if (!is_constant_expr(child)) return false;
  return true;
}

Jet eval_jet(const ExprNode& node, const Vector& point, int order) {
  switch (node.kind) {
    case ExprKind::Constant:
      return Jet::constant(node.constant, point, order);
    case ExprKind::Variable:
      if (node.variable >= point.size())
        throw EvalError("variable index exceeds point dimension");
      return Jet::variable(node.variable, point, order);
    case ExprKind::Unary:
      return -eval_jet(node.children[0], point, order);
    case ExprKind::Binary: {
      if (node.binary_op == BinaryOp::Pow) {
        Jet base = eval_jet(node.children[0], point, order);
        if (is_constant_expr(node.children[1]))
          return pow(base, eval_scalar(node.children[1], point));
        return exp(eval_jet(node.children[1], point, order) * log(base));
      }
      Jet lhs = eval_jet(node.children[0], point, order);
      Jet rhs = eval_jet(node.children[1], point, order);
      switch (node.binary_op) {
        case BinaryOp::Add: return lhs + rhs;
        case BinaryOp::Sub: return lhs - rhs;
        case BinaryOp::Mul: return lhs * rhs;
        case BinaryOp::Div: return lhs / rhs;
        case BinaryOp::Pow: break;
      }
      throw std::logic_error("unreachable");
    }
    case ExprKind::Call: {
      if (node.call == BuiltinFn::Pow) {
        Jet base = eval_jet(node.children[0], point, order);
        if (is_constant_expr(node.children[1]))
          return pow(base, eval_scalar(node.children[1], point));
        return exp(eval_jet(node.children[1], point, order) * log(base));
      }
      Jet arg = eval_jet(node.children[0], point, order);
      switch (node.call) {
        case BuiltinFn::Sin: return sin(arg);
        case BuiltinFn::Cos: return cos(arg);
        case BuiltinFn::Exp: return exp(arg);
        case BuiltinFn::Log: return log(arg);
        case BuiltinFn::Tanh: return tanh(arg);
        case BuiltinFn::Sqrt: return sqrt(arg);
        case BuiltinFn::Abs: return abs(arg);
        case BuiltinFn::Pow: break;
      }
      throw std::logic_error("unreachable");
    }
  }
  throw std::logic_error("unreachable");
}

double eval_scalar(const ExprNode& node, const Vector& point) {
  switch (node.kind) {
    case ExprKind::Constant:
      return node.constant;
    case ExprKind::Variable:
      if (node.variable >= point.size())
        throw EvalError("variable index exceeds point dimension");
      return point[node.variable];
    case ExprKind::Unary:
      return -eval_scalar(node.children[0], point);
    case ExprKind::Binary: {
      const double lhs = eval_scalar(node.children[0], point);
      const double rhs = eval_scalar(node.children[1], point);
      switch (node.binary_op) {
        case BinaryOp::Add: return lhs + rhs;
        case BinaryOp::Sub: return lhs - rhs;
        case BinaryOp::Mul: return lhs * rhs;
        case BinaryOp::Div: return lhs / rhs;
        case BinaryOp::Pow: return std::pow(lhs, rhs);
      }
      break;
    }
    case ExprKind::Call: {
      if (node.call == BuiltinFn::Pow)
        return std::pow(eval_scalar(node.children[0], point),
                        eval_scalar(node.children[1], point));
      const double a = eval_scalar(node.children[0], point);
      switch (node.call) {
        case BuiltinFn::Sin: return std::sin(a);
        case BuiltinFn::Cos: return std::cos(a);
        case BuiltinFn::Exp: return std::exp(a);
        case BuiltinFn::Log: return std::log(a);
        case BuiltinFn::Tanh: return std::tanh(a);
        case BuiltinFn::Sqrt: return std::sqrt(a);
        case BuiltinFn::Abs: return std::abs(a);
        case BuiltinFn::Pow: break;
      }
      break;
    }
  }
  throw std::logic_error("unreachable");
}

SmoothFunction make_function(ExprNode ast, int dimension, std::string name) {
  if (name.empty()) name = to_string(ast);
  auto shared = std::make_shared<const ExprNode>(std::move(ast));
  return SmoothFunction(
      dimension,
      [shared](const Vector& x, int order) {
        return eval_jet(*shared, x, order);
      },
      std::move(name));
}

}  // namespace carre
