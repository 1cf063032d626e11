// SPDX-License-Identifier: Apache-2.0
//
// rceq - reservoir computing channel equalization for OFDM receivers
// Copyright (C) 2026 The rceq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "rceq/toml_lite.hpp"
#include "rceq/numkit.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace rceq {

namespace {

using nlohmann::json;

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    json document()
    {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof())
                break;
            if (peek() == '[') {
                ++pos_;
                skip_inline_ws();
                auto path = key_path();
                skip_inline_ws();
                expect(']');
                table = &root;
                for (const auto& part : path) {
                    if (!table->contains(part))
                        (*table)[part] = json::object();
                    table = &(*table)[part];
                    if (!table->is_object())
                        fail("table header collides with a value: " + part);
                }
            } else {
                auto path = key_path();
                skip_inline_ws();
                expect('=');
                skip_inline_ws();
                json v = value();
                json* target = table;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    if (!target->contains(path[i]))
                        (*target)[path[i]] = json::object();
                    target = &(*target)[path[i]];
                }
                if (target->contains(path.back()))
                    fail("duplicate key: " + path.back());
                (*target)[path.back()] = std::move(v);
            }
            end_of_line();
        }
        return root;
    }

    json single_value()
    {
        skip_inline_ws();
        json v = value();
        skip_inline_ws();
        if (!eof())
            fail("trailing characters after value");
        return v;
    }

    bool eof() const { return pos_ >= s_.size(); }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_) + ": " + msg);
    }

    char peek() const { return eof() ? '\0' : s_[pos_]; }

    void expect(char c)
    {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_inline_ws()
    {
        while (!eof() && (peek() == ' ' || peek() == '\t'))
            ++pos_;
    }

    void skip_comment()
    {
        if (peek() == '#')
            while (!eof() && peek() != '\n')
                ++pos_;
    }

    void skip_blank_lines()
    {
        while (!eof()) {
            skip_inline_ws();
            skip_comment();
            if (peek() == '\r')
                ++pos_;
            if (peek() == '\n') {
                ++pos_;
                ++line_;
                continue;
            }
            break;
        }
    }

    // Whitespace, comments and newlines inside arrays.
    void skip_array_ws()
    {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r')
                ++pos_;
            else if (c == '\n') {
                ++pos_;
                ++line_;
            } else if (c == '#')
                skip_comment();
            else
                break;
        }
    }

    void end_of_line()
    {
        skip_inline_ws();
        skip_comment();
        if (peek() == '\r')
            ++pos_;
        if (eof())
            return;
        if (peek() != '\n')
            fail("unexpected characters at end of line");
        ++pos_;
        ++line_;
    }

    std::vector<std::string> key_path()
    {
        std::vector<std::string> parts;
        while (true) {
            skip_inline_ws();
            if (peek() == '"')
                parts.push_back(basic_string());
            else {
                const std::size_t start = pos_;
                while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
                    ++pos_;
                if (pos_ == start)
                    fail("expected a key");
                parts.push_back(s_.substr(start, pos_ - start));
            }
            skip_inline_ws();
            if (peek() != '.')
                break;
            ++pos_;
        }
        return parts;
    }

    std::string basic_string()
    {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n')
                fail("unterminated string");
            char c = s_[pos_++];
            if (c == '"')
                break;
            if (c == '\\') {
                if (eof())
                    fail("bad escape");
                char e = s_[pos_++];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            } else
                out += c;
        }
        return out;
    }

    std::string literal_string()
    {
        expect('\'');
        const std::size_t start = pos_;
        while (!eof() && peek() != '\'' && peek() != '\n')
            ++pos_;
        if (peek() != '\'')
            fail("unterminated literal string");
        std::string out = s_.substr(start, pos_ - start);
        ++pos_;
        return out;
    }

    json value()
    {
        const char c = peek();
        if (c == '"')
            return basic_string();
        if (c == '\'')
            return literal_string();
        if (c == '[')
            return array();
        const std::size_t start = pos_;
        while (!eof()) {
            const char d = peek();
            if (d == ',' || d == ']' || d == '#' || d == '\n' || d == '\r' || d == ' ' || d == '\t')
                break;
            ++pos_;
        }
        std::string tok = s_.substr(start, pos_ - start);
        if (tok.empty())
            fail("expected a value");
        return scalar(tok);
    }

    json scalar(std::string tok)
    {
        if (tok == "true")
            return true;
        if (tok == "false")
            return false;
        std::string t;
        for (char ch : tok)
            if (ch != '_')
                t += ch;
        if (t.empty())
            fail("cannot parse value '" + tok + "'");
        std::string body = t;
        double sign = 1.0;
        if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
            sign = body[0] == '-' ? -1.0 : 1.0;
            body = body.substr(1);
        }
        if (body == "inf")
            return sign * std::numeric_limits<double>::infinity();
        if (body == "nan")
            return std::numeric_limits<double>::quiet_NaN();
        const bool is_float = t.find_first_of(".eE") != std::string::npos;
        if (!is_float) {
            std::int64_t iv = 0;
            auto [p, ec] = std::from_chars(t.data() + (t[0] == '+' ? 1 : 0), t.data() + t.size(), iv);
            if (ec == std::errc{} && p == t.data() + t.size())
                return iv;
        } else {
            double dv = 0.0;
            auto [p, ec] = std::from_chars(t.data() + (t[0] == '+' ? 1 : 0), t.data() + t.size(), dv);
            if (ec == std::errc{} && p == t.data() + t.size())
                return dv;
        }
        fail("cannot parse value '" + tok + "'");
    }

    json array()
    {
        expect('[');
        json arr = json::array();
        skip_array_ws();
        if (peek() == ']') {
            ++pos_;
            return arr;
        }
        while (true) {
            skip_array_ws();
            arr.push_back(value());
            skip_array_ws();
            if (peek() == ',') {
                ++pos_;
                skip_array_ws();
                if (peek() == ']') {
                    ++pos_;
                    return arr;
                }
                continue;
            }
            if (peek() == ']') {
                ++pos_;
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }
};

} // namespace

nlohmann::json parse_toml_lite(const std::string& text)
{
    Parser p(text);
    return p.document();
}

nlohmann::json parse_toml_value(const std::string& text)
{
    try {
        Parser p(text);
        return p.single_value();
    } catch (const Error&) {
        return text;
    }
}

} // namespace rceq
