#pragma once

#include <string>
#include <vector>

#include "dagex/rational.hpp"

namespace dagex {

// A concrete runtime value: what tools receive as arguments and return
// as results.
struct Value {
    enum class Kind { Text, Number, List };

    Kind kind = Kind::Text;
    std::string text;
    double number = 0.0;
    std::vector<Value> items;

    static Value make_text(std::string s) {
        Value v;
        v.kind = Kind::Text;
        v.text = std::move(s);
        return v;
    }
    static Value make_number(double n) {
        Value v;
        v.kind = Kind::Number;
        v.number = n;
        return v;
    }
    static Value make_list(std::vector<Value> vs) {
        Value v;
        v.kind = Kind::List;
        v.items = std::move(vs);
        return v;
    }

    // Textual form used for placeholder substitution: Text verbatim,
    // Number as shortest round-trip decimal, List as "[a, b]".
    std::string render() const;

    bool operator==(const Value& o) const;
};

} // namespace dagex
