#include "semiconvex/expression.hpp"

#include <cctype>
#include <memory>
#include <numbers>

namespace semiconvex {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NotRegular: return "NotRegular";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::OffSurface: return "OffSurface";
    case ErrorCode::NoSurfacePoints: return "NoSurfacePoints";
    case ErrorCode::SideViolation: return "SideViolation";
    case ErrorCode::NotCausal: return "NotCausal";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

struct Node {
  Expression::Op op;
  int index = 0;
  double value = 0.0;
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make_const(double v) {
  auto n = std::make_unique<Node>();
  n->op = Expression::Op::Const;
  n->value = v;
  return n;
}

const std::map<std::string, Expression::Op>& function_table() {
  static const std::map<std::string, Expression::Op> table = {
      {"sin", Expression::Op::Sin},   {"cos", Expression::Op::Cos},   {"tan", Expression::Op::Tan},
      {"exp", Expression::Op::Exp},   {"log", Expression::Op::Log},   {"sqrt", Expression::Op::Sqrt},
      {"abs", Expression::Op::Abs},   {"sinh", Expression::Op::Sinh}, {"cosh", Expression::Op::Cosh},
      {"tanh", Expression::Op::Tanh}, {"atan", Expression::Op::Atan}, {"asin", Expression::Op::Asin},
      {"acos", Expression::Op::Acos},
  };
  return table;
}

bool is_binary(Expression::Op op) {
  switch (op) {
    case Expression::Op::Add:
    case Expression::Op::Sub:
    case Expression::Op::Mul:
    case Expression::Op::Div:
    case Expression::Op::Pow: return true;
    default: return false;
  }
}

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, const std::vector<std::string>& variables,
                   const std::map<std::string, double>& params)
      : text_(text), variables_(variables), params_(params) {}

  Expression run() {
    NodePtr root = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    fold(root);
    Expression e;
    e.text_ = text_;
    e.arity_ = variables_.size();
    int depth = 0;
    emit(*root, e, depth);
    if (e.max_stack_ > 64) fail("expression too deeply nested");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::ParseError, "'" + text_ + "' at " + std::to_string(pos_) + ": " + why);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr binary(Expression::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr unary(Expression::Op op, NodePtr a) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(a);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Expression::Op::Add, std::move(lhs), parse_product());
      } else if (accept('-')) {
        lhs = binary(Expression::Op::Sub, std::move(lhs), parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Expression::Op::Mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = binary(Expression::Op::Div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return unary(Expression::Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return binary(Expression::Op::Pow, std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    return make_const(v);
  }

  NodePtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);

    if (accept('(')) {
      if (name == "pow") {
        NodePtr a = parse_sum();
        if (!accept(',')) fail("pow expects two arguments");
        NodePtr b = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return binary(Expression::Op::Pow, std::move(a), std::move(b));
      }
      auto it = function_table().find(name);
      if (it == function_table().end()) fail("unknown function '" + name + "'");
      NodePtr arg = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return unary(it->second, std::move(arg));
    }

    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name) {
        auto n = std::make_unique<Node>();
        n->op = Expression::Op::Var;
        n->index = static_cast<int>(i);
        return n;
      }
    }
    if (auto it = params_.find(name); it != params_.end()) return make_const(it->second);
    if (name == "pi") return make_const(std::numbers::pi);
    if (name == "e") return make_const(std::numbers::e);
    fail("unknown identifier '" + name + "'");
  }

  static bool is_const(const NodePtr& n) { return n && n->op == Expression::Op::Const; }

  void fold(NodePtr& n) {
    if (n->lhs) fold(n->lhs);
    if (n->rhs) fold(n->rhs);
    if (is_binary(n->op) && is_const(n->lhs) && is_const(n->rhs)) {
      double a = n->lhs->value;
      double b = n->rhs->value;
      double r = 0.0;
      switch (n->op) {
        case Expression::Op::Add: r = a + b; break;
        case Expression::Op::Sub: r = a - b; break;
        case Expression::Op::Mul: r = a * b; break;
        case Expression::Op::Div: r = a / b; break;
        default: r = pow_real(a, b); break;
      }
      n = make_const(r);
    } else if (!is_binary(n->op) && n->op != Expression::Op::Const && n->op != Expression::Op::Var &&
               is_const(n->lhs)) {
      n = make_const(detail::apply_unary(n->op, n->lhs->value));
    } else if (n->op == Expression::Op::Pow && is_const(n->rhs)) {
      n->op = Expression::Op::PowConst;
      n->value = n->rhs->value;
      n->rhs.reset();
    }
  }

  void emit(const Node& n, Expression& e, int& depth) {
    if (n.lhs) emit(*n.lhs, e, depth);
    if (n.rhs) emit(*n.rhs, e, depth);
    switch (n.op) {
      case Expression::Op::Const:
      case Expression::Op::Var: ++depth; break;
      default:
        if (is_binary(n.op)) --depth;
        break;
    }
    e.max_stack_ = std::max(e.max_stack_, depth);
    e.program_.push_back({n.op, n.index, n.value});
  }

  const std::string& text_;
  const std::vector<std::string>& variables_;
  const std::map<std::string, double>& params_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables,
                             const std::map<std::string, double>& params) {
  return ExpressionParser(text, variables, params).run();
}

}  // namespace semiconvex
