#include "pharmaharvest/dom.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <functional>

namespace pharmaharvest::dom {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_name_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '_' || c == ':' || c == '.' || u >= 0x80;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp == 0 || cp > 0x10FFFF) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

constexpr std::array<std::pair<std::string_view, std::string_view>, 12> kNamedEntities{{
    {"amp", "&"},
    {"lt", "<"},
    {"gt", ">"},
    {"quot", "\""},
    {"apos", "'"},
    {"nbsp", " "},
    {"ndash", "\xE2\x80\x93"},
    {"mdash", "\xE2\x80\x94"},
    {"aring", "\xC3\xA5"},
    {"oslash", "\xC3\xB8"},
    {"aelig", "\xC3\xA6"},
    {"eacute", "\xC3\xA9"},
}};

constexpr std::array<std::string_view, 14> kVoidElements{
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr",
};

bool is_void(std::string_view name) {
    return std::find(kVoidElements.begin(), kVoidElements.end(), name) != kVoidElements.end();
}

class Builder {
public:
    Builder(std::string_view src, bool html) : src_(src), html_(html) {
        root_ = std::make_unique<Node>();
        root_->kind = Node::Kind::Document;
        stack_.push_back(root_.get());
    }

    std::unique_ptr<Node> run() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                if (!markup()) text_until_next_tag(true);
            } else {
                text_until_next_tag(false);
            }
        }
        return std::move(root_);
    }

private:
    Node* current() { return stack_.back(); }

    void add_text(std::string_view raw, bool decode) {
        if (raw.empty()) return;
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::Text;
        node->text = decode ? decode_entities(raw) : std::string(raw);
        node->parent = current();
        current()->children.push_back(std::move(node));
    }

    void text_until_next_tag(bool include_first) {
        const auto start = pos_;
        if (include_first) ++pos_;
        const auto next = src_.find('<', pos_);
        pos_ = next == std::string_view::npos ? src_.size() : next;
        add_text(src_.substr(start, pos_ - start), true);
    }

    // Returns false when the '<' does not open any markup construct.
    bool markup() {
        auto rest = src_.substr(pos_);
        if (rest.starts_with("<!--")) {
            const auto end = src_.find("-->", pos_ + 4);
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return true;
        }
        if (rest.starts_with("<![CDATA[")) {
            const auto end = src_.find("]]>", pos_ + 9);
            const auto stop = end == std::string_view::npos ? src_.size() : end;
            add_text(src_.substr(pos_ + 9, stop - pos_ - 9), false);
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return true;
        }
        if (rest.starts_with("<!") || rest.starts_with("<?")) {
            const auto end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return true;
        }
        if (rest.starts_with("</")) return end_tag();
        if (rest.size() > 1 && std::isalpha(static_cast<unsigned char>(rest[1]))) return start_tag();
        return false;
    }

    std::string read_name() {
        const auto start = pos_;
        while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        return html_ ? text::lower(name) : name;
    }

    void skip_space() {
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
    }

    bool end_tag() {
        pos_ += 2;
        const auto name = read_name();
        const auto close = src_.find('>', pos_);
        pos_ = close == std::string_view::npos ? src_.size() : close + 1;
        if (name.empty()) return true;
        for (auto i = stack_.size(); i-- > 1;) {
            if (stack_[i]->name == name) {
                stack_.resize(i);
                return true;
            }
        }
        return true;  // unmatched end tag: ignored
    }

    bool start_tag() {
        ++pos_;
        auto node = std::make_unique<Node>();
        node->name = read_name();
        bool self_closing = false;
        while (pos_ < src_.size()) {
            skip_space();
            if (pos_ >= src_.size()) break;
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    self_closing = true;
                    ++pos_;
                    break;
                }
                continue;
            }
            const auto attr_start = pos_;
            while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '=' && src_[pos_] != '>' &&
                   !(src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>'))
                ++pos_;
            std::string key(src_.substr(attr_start, pos_ - attr_start));
            if (html_) key = text::lower(key);
            skip_space();
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    const char q = src_[pos_++];
                    const auto end = src_.find(q, pos_);
                    const auto stop = end == std::string_view::npos ? src_.size() : end;
                    value = decode_entities(src_.substr(pos_, stop - pos_));
                    pos_ = end == std::string_view::npos ? src_.size() : end + 1;
                } else {
                    const auto vstart = pos_;
                    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
                    value = decode_entities(src_.substr(vstart, pos_ - vstart));
                }
            }
            if (!key.empty()) node->attributes.emplace_back(std::move(key), std::move(value));
        }

        const std::string name = node->name;
        if (html_) imply_end_tags(name);
        node->parent = current();
        Node* raw = node.get();
        current()->children.push_back(std::move(node));

        if (self_closing || (html_ && is_void(name))) return true;
        if (html_ && (name == "script" || name == "style")) {
            const auto close = find_ci(src_, "</" + name, pos_);
            const auto stop = close == std::string_view::npos ? src_.size() : close;
            if (name == "style") add_text_to(raw, src_.substr(pos_, stop - pos_));
            pos_ = stop;
            if (close != std::string_view::npos) {
                const auto gt = src_.find('>', close);
                pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
            }
            return true;
        }
        stack_.push_back(raw);
        return true;
    }

    static void add_text_to(Node* parent, std::string_view raw) {
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::Text;
        node->text = std::string(raw);
        node->parent = parent;
        parent->children.push_back(std::move(node));
    }

    static std::size_t find_ci(std::string_view hay, const std::string& needle, std::size_t from) {
        for (std::size_t i = from; i + needle.size() <= hay.size(); ++i)
            if (text::iequals(hay.substr(i, needle.size()), needle)) return i;
        return std::string_view::npos;
    }

    // Closes the innermost open `name` element if it sits above every
    // element in `barriers`.
    void close_open(std::initializer_list<std::string_view> names, std::initializer_list<std::string_view> barriers) {
        for (auto i = stack_.size(); i-- > 1;) {
            const auto& n = stack_[i]->name;
            if (std::find(barriers.begin(), barriers.end(), n) != barriers.end()) return;
            if (std::find(names.begin(), names.end(), n) != names.end()) {
                stack_.resize(i);
                return;
            }
        }
    }

    void imply_end_tags(std::string_view name) {
        if (name == "p" || name == "div" || name == "ul" || name == "ol" || name == "table" || name == "h1" ||
            name == "h2" || name == "h3" || name == "section")
            close_open({"p"}, {"div", "section", "td", "th", "li", "body", "table", "button"});
        if (name == "li") close_open({"li"}, {"ul", "ol"});
        if (name == "option") close_open({"option"}, {"select", "datalist"});
        if (name == "td" || name == "th") close_open({"td", "th"}, {"tr", "table"});
        if (name == "tr") {
            close_open({"td", "th"}, {"tr", "table"});
            close_open({"tr"}, {"table", "thead", "tbody", "tfoot"});
        }
        if (name == "thead" || name == "tbody" || name == "tfoot") {
            close_open({"td", "th"}, {"table"});
            close_open({"tr"}, {"table"});
            close_open({"thead", "tbody", "tfoot"}, {"table"});
        }
    }

    std::string_view src_;
    bool html_;
    std::size_t pos_ = 0;
    std::unique_ptr<Node> root_;
    std::vector<Node*> stack_;
};

// ---- selectors ----

struct AttrTest {
    std::string key;
    char op = 0;  // 0 presence, '=' exact, '^' prefix, '$' suffix, '*' contains
    std::string value;
};

struct Compound {
    std::string tag;  // empty or "*" means any
    std::string id;
    std::vector<std::string> classes;
    std::vector<AttrTest> attrs;
};

struct Step {
    Compound compound;
    char combinator = ' ';  // relation to the previous step: ' ' descendant, '>' child
};

using Chain = std::vector<Step>;

class SelectorParser {
public:
    explicit SelectorParser(std::string_view s) : s_(s) {}

    std::vector<Chain> parse() {
        std::vector<Chain> groups;
        Chain chain;
        char pending = ' ';
        while (true) {
            skip();
            if (pos_ >= s_.size()) break;
            const char c = s_[pos_];
            if (c == ',') {
                if (chain.empty()) fail();
                groups.push_back(std::move(chain));
                chain = {};
                pending = ' ';
                ++pos_;
                continue;
            }
            if (c == '>') {
                if (chain.empty()) fail();
                pending = '>';
                ++pos_;
                continue;
            }
            Step step;
            step.compound = compound();
            step.combinator = pending;
            pending = ' ';
            chain.push_back(std::move(step));
        }
        if (chain.empty()) fail();
        groups.push_back(std::move(chain));
        return groups;
    }

private:
    [[noreturn]] void fail() const { throw ParseError("unsupported selector: " + std::string(s_)); }

    void skip() {
        while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
    }

    std::string ident() {
        const auto start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' ||
                                    s_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail();
        return std::string(s_.substr(start, pos_ - start));
    }

    Compound compound() {
        Compound c;
        bool any = false;
        if (pos_ < s_.size() && s_[pos_] == '*') {
            c.tag = "*";
            ++pos_;
            any = true;
        } else if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
            c.tag = text::lower(ident());
            any = true;
        }
        while (pos_ < s_.size()) {
            const char ch = s_[pos_];
            if (ch == '#') {
                ++pos_;
                c.id = ident();
            } else if (ch == '.') {
                ++pos_;
                c.classes.push_back(ident());
            } else if (ch == '[') {
                ++pos_;
                c.attrs.push_back(attr());
            } else {
                break;
            }
            any = true;
        }
        if (!any) fail();
        return c;
    }

    AttrTest attr() {
        AttrTest t;
        skip();
        t.key = text::lower(ident());
        skip();
        if (pos_ >= s_.size()) fail();
        if (s_[pos_] == ']') {
            ++pos_;
            return t;
        }
        if (s_[pos_] == '=') {
            t.op = '=';
            ++pos_;
        } else if ((s_[pos_] == '^' || s_[pos_] == '$' || s_[pos_] == '*') && pos_ + 1 < s_.size() &&
                   s_[pos_ + 1] == '=') {
            t.op = s_[pos_];
            pos_ += 2;
        } else {
            fail();
        }
        skip();
        if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
            const char q = s_[pos_++];
            const auto end = s_.find(q, pos_);
            if (end == std::string_view::npos) fail();
            t.value = std::string(s_.substr(pos_, end - pos_));
            pos_ = end + 1;
        } else {
            const auto start = pos_;
            while (pos_ < s_.size() && s_[pos_] != ']' && !is_space(s_[pos_])) ++pos_;
            t.value = std::string(s_.substr(start, pos_ - start));
        }
        skip();
        if (pos_ >= s_.size() || s_[pos_] != ']') fail();
        ++pos_;
        return t;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

bool matches(const Node& n, const Compound& c) {
    if (!n.is_element()) return false;
    if (!c.tag.empty() && c.tag != "*" && !text::iequals(n.name, c.tag)) return false;
    if (!c.id.empty()) {
        const auto* id = n.attr("id");
        if (!id || *id != c.id) return false;
    }
    for (const auto& cls : c.classes)
        if (!n.has_class(cls)) return false;
    for (const auto& t : c.attrs) {
        const auto* v = n.attr(t.key);
        if (!v) return false;
        switch (t.op) {
            case '=': if (*v != t.value) return false; break;
            case '^': if (!std::string_view(*v).starts_with(t.value)) return false; break;
            case '$': if (!std::string_view(*v).ends_with(t.value)) return false; break;
            case '*': if (v->find(t.value) == std::string::npos) return false; break;
            default: break;
        }
    }
    return true;
}

// Does `n` satisfy chain[0..=idx], with the ancestors constrained to lie
// strictly inside `scope`?
bool matches_chain(const Node& n, const Chain& chain, std::size_t idx, const Node& scope) {
    if (!matches(n, chain[idx].compound)) return false;
    if (idx == 0) return true;
    const char comb = chain[idx].combinator;
    for (const Node* p = n.parent; p && p != &scope; p = p->parent) {
        if (matches_chain(*p, chain, idx - 1, scope)) return true;
        if (comb == '>') return false;
    }
    return false;
}

void walk(const Node& n, const std::function<void(const Node&)>& fn) {
    for (const auto& c : n.children) {
        if (!c->is_element()) continue;
        fn(*c);
        walk(*c, fn);
    }
}

void collect_text(const Node& n, std::string& out) {
    if (n.kind == Node::Kind::Text) {
        out += n.text;
        return;
    }
    for (const auto& c : n.children) collect_text(*c, out);
}

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        const auto ref = s.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!ref.empty() && ref[0] == '#') {
            unsigned long cp = 0;
            const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
            const auto digits = ref.substr(hex ? 2 : 1);
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (ec == std::errc{} && p == digits.data() + digits.size() && !digits.empty()) {
                append_utf8(out, cp == 0xA0 ? 0x20 : cp);
                done = true;
            }
        } else {
            for (const auto& [name, value] : kNamedEntities) {
                if (name == ref) {
                    out += value;
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi;
        } else {
            out.push_back('&');
        }
    }
    return out;
}

const std::string* Node::attr(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

bool Node::has_class(std::string_view cls) const {
    const auto* v = attr("class");
    if (!v) return false;
    for (const auto& token : text::split(text::collapse_whitespace(*v), ' '))
        if (token == cls) return true;
    return false;
}

std::string_view Node::local_name() const {
    std::string_view n = name;
    if (const auto colon = n.find(':'); colon != std::string_view::npos) n.remove_prefix(colon + 1);
    return n;
}

std::string Node::raw_text() const {
    std::string out;
    collect_text(*this, out);
    return out;
}

std::string Node::text_content() const { return text::collapse_whitespace(raw_text()); }

std::vector<const Node*> Node::element_children() const {
    std::vector<const Node*> out;
    for (const auto& c : children)
        if (c->is_element()) out.push_back(c.get());
    return out;
}

std::vector<const Node*> Node::children_named(std::string_view n) const {
    std::vector<const Node*> out;
    for (const auto& c : children)
        if (c->is_element() && c->local_name() == n) out.push_back(c.get());
    return out;
}

const Node* Node::first_child_named(std::string_view n) const {
    for (const auto& c : children)
        if (c->is_element() && c->local_name() == n) return c.get();
    return nullptr;
}

std::vector<const Node*> Node::descendants_named(std::string_view n) const {
    std::vector<const Node*> out;
    walk(*this, [&](const Node& e) {
        if (e.local_name() == n) out.push_back(&e);
    });
    return out;
}

std::vector<const Node*> select(const Node& scope, std::string_view selector) {
    const auto groups = SelectorParser(selector).parse();
    std::vector<const Node*> out;
    walk(scope, [&](const Node& n) {
        for (const auto& chain : groups) {
            if (matches_chain(n, chain, chain.size() - 1, scope)) {
                out.push_back(&n);
                break;
            }
        }
    });
    return out;
}

const Node* select_one(const Node& scope, std::string_view selector) {
    const auto all = select(scope, selector);
    return all.empty() ? nullptr : all.front();
}

Document Document::parse_html(std::string_view markup) {
    Document d;
    d.root_ = Builder(markup, true).run();
    return d;
}

Document Document::parse_xml(std::string_view markup) {
    Document d;
    d.root_ = Builder(markup, false).run();
    return d;
}

}  // namespace pharmaharvest::dom
