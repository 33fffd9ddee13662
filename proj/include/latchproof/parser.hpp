#pragma once

#include <stdexcept>
#include <string>

#include "latchproof/ast.hpp"

namespace latchproof {

struct SourceFile {
    std::string path;
    std::string text;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& expected, const std::string& found)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": expected " + expected +
                             (found.empty() ? "" : ", found '" + found + "'")),
          line(line), col(col), expected(expected) {}
    int line;
    int col;
    std::string expected;
};

Program parse_program(const SourceFile& src);
Program parse_program(const std::string& text);
Formula parse_formula(const std::string& text);
Pure parse_pure(const std::string& text);

std::string print(const Formula& f);
std::string print(const Disjunct& d);
std::string print(const HeapAtom& a);
std::string print(const Program& p);
std::string print(const ExprPtr& e, int indent = 0);

}  // namespace latchproof
