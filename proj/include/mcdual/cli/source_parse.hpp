#pragma once

#include "mcdual/forced.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcdual::cli {

/// Malformed configuration or command-line input (exit status 2).
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grammar error in a source specification; position is a 0-based offset.
class source_syntax_error : public parse_error {
public:
    source_syntax_error(const std::string& what, std::size_t position)
        : parse_error("source: " + what + " at position " + std::to_string(position)), position_(position)
    {
    }

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

namespace detail {

struct SourceAtom {
    enum class Kind { constant, sine, cosine, gauss };
    Kind kind = Kind::constant;
    double scale = 1.0;
    double p0 = 0.0;
    double p1 = 1.0;

    double operator()(double t) const
    {
        switch (kind) {
        case Kind::constant:
            return scale * p0;
        case Kind::sine:
            return scale * std::sin(p0 * t);
        case Kind::cosine:
            return scale * std::cos(p0 * t);
        case Kind::gauss: {
            const double u = (t - p0) / p1;
            return scale * std::exp(-u * u);
        }
        }
        return 0.0;
    }
};

class SourceParser {
public:
    explicit SourceParser(std::string_view text) : text_(text) {}

    std::vector<std::vector<SourceAtom>> parse()
    {
        std::vector<std::vector<SourceAtom>> channels;
        channels.push_back(channel());
        while (peek() == ';') {
            ++pos_;
            channels.push_back(channel());
        }
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return channels;
    }

private:
    std::vector<SourceAtom> channel()
    {
        std::vector<SourceAtom> terms;
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') {
            sign = text_[pos_++] == '-' ? -1.0 : 1.0;
        }
        terms.push_back(term(sign));
        while (peek() == '+' || peek() == '-') {
            sign = text_[pos_++] == '-' ? -1.0 : 1.0;
            terms.push_back(term(sign));
        }
        return terms;
    }

    SourceAtom term(double sign)
    {
        SourceAtom atom;
        atom.scale = sign;
        skip_space();
        if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            atom.scale *= number();
            expect('*');
        }
        skip_space();
        const std::size_t at = pos_;
        std::string name;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
            name += text_[pos_++];
        }
        if (name.empty()) {
            fail("expected const, sin, cos or gauss", at);
        }
        expect('(');
        if (name == "const") {
            atom.kind = SourceAtom::Kind::constant;
            atom.p0 = signed_number();
        } else if (name == "sin" || name == "cos") {
            atom.kind = name == "sin" ? SourceAtom::Kind::sine : SourceAtom::Kind::cosine;
            atom.p0 = signed_number();
        } else if (name == "gauss") {
            atom.kind = SourceAtom::Kind::gauss;
            atom.p0 = signed_number();
            expect(',');
            const std::size_t width_at = (skip_space(), pos_);
            atom.p1 = signed_number();
            if (!(atom.p1 > 0.0)) {
                fail("gauss width must be positive", width_at);
            }
        } else {
            fail("unknown function '" + name + "'", at);
        }
        expect(')');
        return atom;
    }

    double signed_number()
    {
        double s = 1.0;
        if (peek() == '-' || peek() == '+') {
            s = text_[pos_++] == '-' ? -1.0 : 1.0;
        }
        skip_space();
        return s * number();
    }

    double number()
    {
        double v = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        const auto [end, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || !std::isfinite(v)) {
            fail("expected a number");
        }
        pos_ += static_cast<std::size_t>(end - first);
        return v;
    }

    void expect(char c)
    {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    char peek()
    {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    [[noreturn]] void fail(const std::string& what) { fail(what, pos_); }
    [[noreturn]] void fail(const std::string& what, std::size_t at) { throw source_syntax_error(what, at); }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a per-channel source specification.
///
///   spec    := channel (';' channel)*
///   channel := ['+'|'-'] term (('+'|'-') term)*
///   term    := [number '*'] func
///   func    := const(c) | sin(w) | cos(w) | gauss(center, width)
///
/// gauss(c, w) = exp(-((t - c) / w)^2). The number of channels must match n.
inline SourceTerm source_parse(std::string_view spec, std::size_t n)
{
    auto channels = detail::SourceParser(spec).parse();
    if (channels.size() != n) {
        throw validation_error("source: " + std::to_string(channels.size()) + " channel expression(s) for " +
                               std::to_string(n) + " channel(s)");
    }
    auto shared = std::make_shared<const std::vector<std::vector<detail::SourceAtom>>>(std::move(channels));
    return SourceTerm(n, [shared](double t) {
        Eigen::VectorXd g(static_cast<Eigen::Index>(shared->size()));
        for (std::size_t i = 0; i < shared->size(); ++i) {
            double sum = 0.0;
            for (const auto& a : (*shared)[i]) {
                sum += a(t);
            }
            g[static_cast<Eigen::Index>(i)] = sum;
        }
        return g;
    });
}

}  // namespace mcdual::cli
