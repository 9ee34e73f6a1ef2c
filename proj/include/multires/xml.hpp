#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "multires/errors.hpp"

namespace multires::xml {

// Element tree produced by parse(). Attributes are validated for syntax but
// not retained; annotation files never use them.
struct Node {
  std::string name;
  std::string text;  // concatenated character data directly inside the element
  std::vector<Node> children;
  int line = 0;  // line of the start tag, 1-based

  const Node* child(std::string_view child_name) const {
    for (const Node& node : children)
      if (node.name == child_name) return &node;
    return nullptr;
  }

  std::vector<const Node*> children_named(std::string_view child_name) const {
    std::vector<const Node*> out;
    for (const Node& node : children)
      if (node.name == child_name) out.push_back(&node);
    return out;
  }
};

namespace detail {

inline bool is_name_start(char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_' ||
         ch == ':';
}

inline bool is_name_char(char ch) {
  return is_name_start(ch) || (ch >= '0' && ch <= '9') || ch == '-' ||
         ch == '.';
}

inline bool is_space(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n';
}

// Non-validating recursive-descent parser over a byte view. Total on any
// input: every failure path raises ParseError with the current line.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse_document() {
    if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;  // UTF-8 BOM
    skip_misc();
    if (eof() || peek() != '<') fail("expected root element");
    Node root = parse_element();
    skip_misc();
    if (!eof()) fail("trailing content after root element");
    return root;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("xml: line " + std::to_string(line_) + ": " + message,
                     line_);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char get() {
    const char ch = text_[pos_++];
    if (ch == '\n') ++line_;
    return ch;
  }

  bool lookahead(std::string_view token) const {
    return text_.substr(pos_, token.size()) == token;
  }

  bool consume(std::string_view token) {
    if (!lookahead(token)) return false;
    for (std::size_t i = 0; i < token.size(); ++i) get();
    return true;
  }

  void skip_space() {
    while (!eof() && is_space(peek())) get();
  }

  void scan_until(std::string_view terminator, const char* what) {
    while (!consume(terminator)) {
      if (eof()) fail(std::string("unterminated ") + what);
      get();
    }
  }

  // whitespace, comments, processing instructions, DOCTYPE
  void skip_misc() {
    for (;;) {
      skip_space();
      if (consume("<!--")) {
        scan_until("-->", "comment");
      } else if (consume("<?")) {
        scan_until("?>", "processing instruction");
      } else if (consume("<!DOCTYPE")) {
        int brackets = 0;
        for (;;) {
          if (eof()) fail("unterminated DOCTYPE");
          const char ch = get();
          if (ch == '[') ++brackets;
          else if (ch == ']') --brackets;
          else if (ch == '>' && brackets <= 0) break;
        }
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    if (eof() || !is_name_start(peek())) fail("expected a name");
    std::string name;
    while (!eof() && is_name_char(peek())) name.push_back(get());
    return name;
  }

  void append_entity(std::string& out) {
    get();  // '&'
    std::string entity;
    while (!eof() && peek() != ';') {
      entity.push_back(get());
      if (entity.size() > 10) fail("malformed entity reference");
    }
    if (eof()) fail("unterminated entity reference");
    get();  // ';'
    if (entity == "amp") out.push_back('&');
    else if (entity == "lt") out.push_back('<');
    else if (entity == "gt") out.push_back('>');
    else if (entity == "quot") out.push_back('"');
    else if (entity == "apos") out.push_back('\'');
    else if (!entity.empty() && entity.front() == '#') append_charref(out, entity);
    else fail("unknown entity &" + entity + ";");
  }

  void append_charref(std::string& out, const std::string& entity) {
    std::size_t i = 1;
    int base = 10;
    if (i < entity.size() && (entity[i] == 'x' || entity[i] == 'X')) {
      base = 16;
      ++i;
    }
    if (i >= entity.size()) fail("malformed character reference");
    unsigned long code = 0;
    for (; i < entity.size(); ++i) {
      const char ch = entity[i];
      int digit;
      if (ch >= '0' && ch <= '9') digit = ch - '0';
      else if (base == 16 && ch >= 'a' && ch <= 'f') digit = ch - 'a' + 10;
      else if (base == 16 && ch >= 'A' && ch <= 'F') digit = ch - 'A' + 10;
      else fail("malformed character reference");
      code = code * static_cast<unsigned long>(base) + static_cast<unsigned long>(digit);
      if (code > 0x10FFFF) fail("character reference out of range");
    }
    // encode as UTF-8
    if (code < 0x80) {
      out.push_back(static_cast<char>(code));
    } else if (code < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (code >> 6)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else if (code < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (code >> 12)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (code >> 18)));
      out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    }
  }

  void parse_attribute() {
    parse_name();
    skip_space();
    if (eof() || peek() != '=') fail("expected '=' in attribute");
    get();
    skip_space();
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    const char quote = get();
    while (!eof() && peek() != quote) {
      if (peek() == '<') fail("'<' is not allowed in attribute values");
      get();
    }
    if (eof()) fail("unterminated attribute value");
    get();
  }

  Node parse_element() {
    Node node;
    node.line = line_;
    get();  // '<'
    node.name = parse_name();
    for (;;) {
      skip_space();
      if (eof()) fail("unterminated start tag <" + node.name + ">");
      if (consume("/>")) return node;
      if (peek() == '>') {
        get();
        break;
      }
      parse_attribute();
    }
    // content
    for (;;) {
      if (eof()) fail("unexpected end of input inside <" + node.name + ">");
      if (consume("</")) {
        const std::string closing = parse_name();
        if (closing != node.name)
          fail("mismatched closing tag </" + closing + "> for <" + node.name + ">");
        skip_space();
        if (eof() || peek() != '>') fail("malformed closing tag");
        get();
        return node;
      }
      if (consume("<!--")) {
        scan_until("-->", "comment");
      } else if (consume("<![CDATA[")) {
        while (!lookahead("]]>")) {
          if (eof()) fail("unterminated CDATA section");
          node.text.push_back(get());
        }
        consume("]]>");
      } else if (consume("<?")) {
        scan_until("?>", "processing instruction");
      } else if (peek() == '<') {
        node.children.push_back(parse_element());
      } else if (peek() == '&') {
        append_entity(node.text);
      } else {
        node.text.push_back(get());
      }
    }
  }
};

}  // namespace detail

inline Node parse(std::string_view text) {
  detail::Parser parser(text);
  return parser.parse_document();
}

}  // namespace multires::xml
