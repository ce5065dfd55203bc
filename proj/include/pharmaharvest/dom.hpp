#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pharmaharvest::dom {

struct Node {
    enum class Kind { Document, Element, Text };

    Kind kind = Kind::Element;
    std::string name;  ///< tag name; lowercased when parsed as HTML
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;  ///< text nodes only, entities decoded
    std::vector<std::unique_ptr<Node>> children;
    Node* parent = nullptr;

    bool is_element() const noexcept { return kind == Kind::Element; }
    const std::string* attr(std::string_view key) const;
    bool has_class(std::string_view cls) const;
    /// Name without any namespace prefix ("x:row" -> "row").
    std::string_view local_name() const;

    /// All descendant text concatenated, whitespace collapsed.
    std::string text_content() const;
    /// All descendant text concatenated verbatim.
    std::string raw_text() const;

    std::vector<const Node*> element_children() const;
    /// Direct element children whose local name equals `name`.
    std::vector<const Node*> children_named(std::string_view name) const;
    const Node* first_child_named(std::string_view name) const;
    /// Element descendants (document order) whose local name equals `name`.
    std::vector<const Node*> descendants_named(std::string_view name) const;
};

/// Selector subset: type, '*', #id, .class, [attr], [attr=v], [attr^=v],
/// [attr$=v], [attr*=v], descendant and '>' child combinators, and ','
/// groups. Throws ParseError on selectors outside that subset.
std::vector<const Node*> select(const Node& scope, std::string_view selector);
const Node* select_one(const Node& scope, std::string_view selector);

class Document {
public:
    /// Lenient HTML: void elements, implied end tags for p/li/tr/td/th/
    /// option/thead/tbody, unmatched end tags ignored, script/style bodies
    /// skipped. Never throws on malformed markup.
    static Document parse_html(std::string_view markup);
    /// Well-formedness is not enforced; names keep their case.
    static Document parse_xml(std::string_view markup);

    const Node& root() const noexcept { return *root_; }
    std::vector<const Node*> select(std::string_view selector) const { return dom::select(*root_, selector); }
    const Node* select_one(std::string_view selector) const { return dom::select_one(*root_, selector); }

private:
    std::unique_ptr<Node> root_;
};

/// Decodes character references (&amp; &#39; &#x41; &nbsp; ...). &nbsp;
/// becomes a plain space.
std::string decode_entities(std::string_view s);

}  // namespace pharmaharvest::dom
