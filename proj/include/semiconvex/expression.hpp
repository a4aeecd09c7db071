#pragma once

#include "semiconvex/dual.hpp"
#include "semiconvex/types.hpp"

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace semiconvex {

/// Arithmetic expression over named variables, compiled to a postfix program.
///
/// Grammar: + - * / ^ (right associative, binds tighter than unary minus),
/// parentheses, numeric literals, the constants `pi` and `e`, named parameters
/// (substituted as constants at parse time) and the functions sin cos tan exp
/// log sqrt abs sinh cosh tanh atan asin acos pow(a, b).
///
/// Evaluation is templated so the same program runs on doubles and on nested
/// dual numbers.
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                          const std::map<std::string, double>& params = {});

  template <class T>
  T evaluate(std::span<const T> x) const;

  const std::string& text() const { return text_; }
  std::size_t arity() const { return arity_; }

  enum class Op : unsigned char {
    Const,
    Var,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    PowConst,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
    Atan,
    Asin,
    Acos,
  };

  struct Instr {
    Op op;
    int index = 0;
    double value = 0.0;
  };

 private:
  friend class ExpressionParser;

  std::string text_;
  std::size_t arity_ = 0;
  std::vector<Instr> program_;
  int max_stack_ = 0;
};

namespace detail {

template <class T>
T apply_unary(Expression::Op op, const T& a) {
  using std::abs, std::acos, std::asin, std::atan, std::cos, std::cosh, std::exp, std::log,
      std::sin, std::sinh, std::sqrt, std::tan, std::tanh;
  switch (op) {
    case Expression::Op::Neg: return -a;
    case Expression::Op::Sin: return sin(a);
    case Expression::Op::Cos: return cos(a);
    case Expression::Op::Tan: return tan(a);
    case Expression::Op::Exp: return exp(a);
    case Expression::Op::Log: return log(a);
    case Expression::Op::Sqrt: return sqrt(a);
    case Expression::Op::Abs: return abs(a);
    case Expression::Op::Sinh: return sinh(a);
    case Expression::Op::Cosh: return cosh(a);
    case Expression::Op::Tanh: return tanh(a);
    case Expression::Op::Atan: return atan(a);
    case Expression::Op::Asin: return asin(a);
    case Expression::Op::Acos: return acos(a);
    default: return a;
  }
}

inline double pow_generic(double a, double b) { return std::pow(a, b); }
template <class T>
Dual<T> pow_generic(const Dual<T>& a, const Dual<T>& b) {
  return pow(a, b);
}

inline double pow_const(double a, double p) { return pow_real(a, p); }
template <class T>
Dual<T> pow_const(const Dual<T>& a, double p) {
  return pow(a, p);
}

}  // namespace detail

template <class T>
T Expression::evaluate(std::span<const T> x) const {
  if (x.size() < arity_) throw Error(ErrorCode::InvalidArgument, "expression '" + text_ + "' needs " +
                                                                     std::to_string(arity_) + " variables");
  constexpr int kStack = 64;
  std::array<T, kStack> stack{};
  int top = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: stack[top++] = T(in.value); break;
      case Op::Var: stack[top++] = x[static_cast<std::size_t>(in.index)]; break;
      case Op::Add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
      case Op::Sub: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
      case Op::Mul: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
      case Op::Div: --top; stack[top - 1] = stack[top - 1] / stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = detail::pow_generic(stack[top - 1], stack[top]); break;
      case Op::PowConst: stack[top - 1] = detail::pow_const(stack[top - 1], in.value); break;
      default: stack[top - 1] = detail::apply_unary(in.op, stack[top - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace semiconvex
