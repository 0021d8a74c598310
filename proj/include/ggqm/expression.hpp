#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ggqm {

// value with first partials in x and y
struct Dual2 {
    double v = 0, dx = 0, dy = 0;
};

inline Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
inline Dual2 operator-(Dual2 a, Dual2 b) { return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
inline Dual2 operator-(Dual2 a) { return {-a.v, -a.dx, -a.dy}; }
inline Dual2 operator*(Dual2 a, Dual2 b) { return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy}; }
inline Dual2 operator/(Dual2 a, Dual2 b) {
    double q = a.v / b.v;
    return {q, (a.dx - q * b.dx) / b.v, (a.dy - q * b.dy) / b.v};
}
// chain rule with f(a.v) = fv, f'(a.v) = d
inline Dual2 chain(Dual2 a, double fv, double d) { return {fv, d * a.dx, d * a.dy}; }

// Closed-form scalar field in x, y (and r = sqrt(x^2+y^2)), with + - * / ^, parentheses,
// sin cos tan exp log sqrt abs tanh sinh cosh atan min max pow smoothstep, and the constant pi.
class Expression {
public:
    Expression() = default;
    explicit Expression(std::string text) : text_(std::move(text)) {
        pos_ = 0;
        root_ = parse_sum();
        skip();
        if (pos_ != text_.size()) fail("unexpected trailing input");
    }

    const std::string& text() const { return text_; }
    bool empty() const { return !root_; }

    Dual2 eval(double x, double y) const {
        if (!root_) return {};
        return root_->eval(x, y);
    }
    double operator()(double x, double y) const { return eval(x, y).v; }

private:
    struct Node {
        enum Op { num, var_x, var_y, var_r, add, sub, mul, dvd, pow_, neg, call } op = num;
        double value = 0;
        std::string fn;
        std::vector<std::shared_ptr<Node>> kids;

        Dual2 eval(double x, double y) const {
            switch (op) {
                case num: return {value, 0, 0};
                case var_x: return {x, 1, 0};
                case var_y: return {y, 0, 1};
                case var_r: {
                    double r = std::hypot(x, y);
                    if (r == 0) return {0, 0, 0};
                    return {r, x / r, y / r};
                }
                case add: return kids[0]->eval(x, y) + kids[1]->eval(x, y);
                case sub: return kids[0]->eval(x, y) - kids[1]->eval(x, y);
                case mul: return kids[0]->eval(x, y) * kids[1]->eval(x, y);
                case dvd: return kids[0]->eval(x, y) / kids[1]->eval(x, y);
                case neg: return -kids[0]->eval(x, y);
                case pow_: {
                    Dual2 b = kids[1]->eval(x, y);
                    return power(kids[0]->eval(x, y), b, b.dx == 0 && b.dy == 0);
                }
                case call: return apply(x, y);
            }
            return {};
        }

        static Dual2 power(Dual2 a, Dual2 b, bool const_exp) {
            if (const_exp) {
                double e = b.v;
                if (a.v == 0 && e > 0) return {0, e == 1 ? a.dx : 0, e == 1 ? a.dy : 0};
                double fv = std::pow(a.v, e);
                return chain(a, fv, e * std::pow(a.v, e - 1));
            }
            double fv = std::pow(a.v, b.v);
            double la = std::log(a.v);
            return {fv, fv * (b.dx * la + b.v * a.dx / a.v), fv * (b.dy * la + b.v * a.dy / a.v)};
        }

        Dual2 apply(double x, double y) const {
            std::vector<Dual2> a;
            for (const auto& k : kids) a.push_back(k->eval(x, y));
            auto one = [&](double fv, double d) { return chain(a[0], fv, d); };
            double v = a.empty() ? 0 : a[0].v;
            if (fn == "sin") return one(std::sin(v), std::cos(v));
            if (fn == "cos") return one(std::cos(v), -std::sin(v));
            if (fn == "tan") return one(std::tan(v), 1 / (std::cos(v) * std::cos(v)));
            if (fn == "exp") return one(std::exp(v), std::exp(v));
            if (fn == "log") return one(std::log(v), 1 / v);
            if (fn == "sqrt") return one(std::sqrt(v), v > 0 ? 0.5 / std::sqrt(v) : 0);
            if (fn == "abs") return one(std::abs(v), v > 0 ? 1 : (v < 0 ? -1 : 0));
            if (fn == "tanh") return one(std::tanh(v), 1 - std::tanh(v) * std::tanh(v));
            if (fn == "sinh") return one(std::sinh(v), std::cosh(v));
            if (fn == "cosh") return one(std::cosh(v), std::sinh(v));
            if (fn == "atan") return one(std::atan(v), 1 / (1 + v * v));
            if (fn == "min") return a[0].v <= a[1].v ? a[0] : a[1];
            if (fn == "max") return a[0].v >= a[1].v ? a[0] : a[1];
            if (fn == "pow") return power(a[0], a[1], a[1].dx == 0 && a[1].dy == 0);
            if (fn == "smoothstep") {
                // smoothstep(e0, e1, s): C^1 ramp from 0 to 1
                double e0 = a[0].v, e1 = a[1].v;
                Dual2 s = a[2];
                double t = (s.v - e0) / (e1 - e0);
                if (t <= 0) return {0, 0, 0};
                if (t >= 1) return {1, 0, 0};
                double d = 6 * t * (1 - t) / (e1 - e0);
                return chain(s, t * t * (3 - 2 * t), d);
            }
            throw std::invalid_argument("unknown function " + fn);
        }
    };
    using P = std::shared_ptr<Node>;

    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("expression '" + text_ + "': " + why + " at offset " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    static P make(Node::Op op, std::vector<P> kids) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->kids = std::move(kids);
        return n;
    }

    P parse_sum() {
        P lhs = parse_product();
        while (true) {
            if (eat('+')) lhs = make(Node::add, {lhs, parse_product()});
            else if (eat('-')) lhs = make(Node::sub, {lhs, parse_product()});
            else return lhs;
        }
    }
    P parse_product() {
        P lhs = parse_unary();
        while (true) {
            if (eat('*')) lhs = make(Node::mul, {lhs, parse_unary()});
            else if (eat('/')) lhs = make(Node::dvd, {lhs, parse_unary()});
            else return lhs;
        }
    }
    P parse_unary() {
        if (eat('-')) return make(Node::neg, {parse_unary()});
        if (eat('+')) return parse_unary();
        return parse_power();
    }
    P parse_power() {
        P base = parse_atom();
        if (eat('^')) return make(Node::pow_, {base, parse_unary()});
        return base;
    }
    P parse_atom() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            P e = parse_sum();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(text_.substr(pos_), &used);
            pos_ += used;
            auto n = std::make_shared<Node>();
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t s = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
            std::string id = text_.substr(s, pos_ - s);
            if (id == "x") return make(Node::var_x, {});
            if (id == "y") return make(Node::var_y, {});
            if (id == "r") return make(Node::var_r, {});
            if (id == "pi") {
                auto n = std::make_shared<Node>();
                n->value = M_PI;
                return n;
            }
            if (!eat('(')) fail("unknown identifier '" + id + "'");
            auto n = std::make_shared<Node>();
            n->op = Node::call;
            n->fn = id;
            if (!eat(')')) {
                do n->kids.push_back(parse_sum());
                while (eat(','));
                if (!eat(')')) fail("missing ')' after arguments");
            }
            static const std::vector<std::pair<std::string, std::size_t>> arity{
                {"sin", 1}, {"cos", 1}, {"tan", 1}, {"exp", 1}, {"log", 1}, {"sqrt", 1}, {"abs", 1},
                {"tanh", 1}, {"sinh", 1}, {"cosh", 1}, {"atan", 1}, {"min", 2}, {"max", 2}, {"pow", 2},
                {"smoothstep", 3}};
            bool known = false;
            for (const auto& [name, k] : arity)
                if (name == id) {
                    known = true;
                    if (n->kids.size() != k) fail("wrong argument count for " + id);
                }
            if (!known) fail("unknown function '" + id + "'");
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string text_;
    std::size_t pos_ = 0;
    P root_;
};

}  // namespace ggqm
