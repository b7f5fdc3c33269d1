#include "forge/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>

#include "forge/error.hpp"
#include "forge/llm/client.hpp"
#include "forge/util.hpp"

namespace forge {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string_view, std::uint32_t> table = {
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
      {"apos", '\''},   {"nbsp", 0xA0},    {"copy", 0xA9},    {"reg", 0xAE},
      {"trade", 0x2122}, {"mdash", 0x2014}, {"ndash", 0x2013}, {"hellip", 0x2026},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"bull", 0x2022}, {"middot", 0xB7},  {"euro", 0x20AC},  {"pound", 0xA3},
      {"yen", 0xA5},    {"cent", 0xA2},    {"deg", 0xB0},     {"times", 0xD7},
      {"eacute", 0xE9}, {"egrave", 0xE8},  {"aacute", 0xE1},  {"agrave", 0xE0},
      {"iacute", 0xED}, {"oacute", 0xF3},  {"uacute", 0xFA},  {"ntilde", 0xF1},
      {"uuml", 0xFC},   {"ouml", 0xF6},    {"auml", 0xE4},    {"szlig", 0xDF},
      {"ccedil", 0xE7}, {"laquo", 0xAB},   {"raquo", 0xBB},   {"shy", 0xAD},
  };
  return table;
}

bool is_block_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 34> kBlock = {
      "address", "article", "aside", "blockquote", "br",      "dd",     "div",
      "dl",      "dt",      "fieldset", "figcaption", "figure", "footer", "form",
      "h1",      "h2",      "h3",     "h4",         "h5",     "h6",     "header",
      "hr",      "li",      "main",   "nav",        "ol",     "p",      "pre",
      "section", "table",   "td",     "th",         "tr",     "ul"};
  return std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end();
}

// Regions whose text is boilerplate rather than page content.
bool is_excluded_region(std::string_view name) {
  return name == "nav" || name == "footer" || name == "noscript" || name == "template" ||
         name == "svg";
}

bool is_raw_text(std::string_view name) {
  return name == "script" || name == "style" || name == "title" || name == "textarea";
}

bool ieq_at(std::string_view s, std::size_t pos, std::string_view needle) {
  if (pos + needle.size() > s.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != needle[i]) return false;
  }
  return true;
}

std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (ieq_at(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

struct Tag {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  bool closing = false;
  bool self_closing = false;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

// Parses a tag starting at html[pos] == '<'. Returns the index after '>'.
std::size_t parse_tag(std::string_view html, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-' ||
                             html[i] == ':')) {
    tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[i]))));
    ++i;
  }
  while (i < html.size() && html[i] != '>') {
    auto c = static_cast<unsigned char>(html[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '/') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    std::string key;
    while (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '=' &&
           html[i] != '>' && !(html[i] == '/' && i + 1 < html.size() && html[i + 1] == '>')) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[i]))));
      ++i;
    }
    while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
    std::string value;
    if (i < html.size() && html[i] == '=') {
      ++i;
      while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        char q = html[i++];
        auto end = html.find(q, i);
        if (end == std::string_view::npos) end = html.size();
        value = std::string(html.substr(i, end - i));
        i = std::min(end + 1, html.size());
      } else {
        while (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '>') {
          value.push_back(html[i++]);
        }
      }
    }
    if (!key.empty()) {
      tag.self_closing = false;
      tag.attrs.emplace_back(std::move(key), decode_entities(value));
    }
  }
  return std::min(i + 1, html.size());
}

class Scanner {
 public:
  explicit Scanner(std::string_view html) : html_(html) {}

  HtmlScan run() {
    std::size_t i = 0;
    while (i < html_.size()) {
      if (html_[i] != '<') {
        auto next = html_.find('<', i);
        if (next == std::string_view::npos) next = html_.size();
        on_text(decode_entities(html_.substr(i, next - i)));
        i = next;
        continue;
      }
      if (html_.compare(i, 4, "<!--") == 0) {
        auto end = html_.find("-->", i + 4);
        i = end == std::string_view::npos ? html_.size() : end + 3;
        continue;
      }
      if (i + 1 < html_.size() && (html_[i + 1] == '!' || html_[i + 1] == '?')) {
        auto end = html_.find('>', i);
        i = end == std::string_view::npos ? html_.size() : end + 1;
        continue;
      }
      bool looks_like_tag =
          i + 1 < html_.size() && (std::isalpha(static_cast<unsigned char>(html_[i + 1])) ||
                                   (html_[i + 1] == '/' && i + 2 < html_.size() &&
                                    std::isalpha(static_cast<unsigned char>(html_[i + 2]))));
      if (!looks_like_tag) {
        on_text("<");
        ++i;
        continue;
      }
      Tag tag;
      i = parse_tag(html_, i, tag);
      if (tag.closing) {
        on_end(tag.name);
      } else if (is_raw_text(tag.name) && !tag.self_closing) {
        std::string close = "</" + tag.name;
        auto end = ifind(html_, close, i);
        std::string_view body = html_.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
        if (tag.name == "title" && scan_.title.empty()) {
          scan_.title = normalize_space(decode_entities(body));
        } else if (tag.name == "textarea") {
          on_text(decode_entities(body));
        }
        if (end == std::string_view::npos) {
          i = html_.size();
        } else {
          auto gt = html_.find('>', end);
          i = gt == std::string_view::npos ? html_.size() : gt + 1;
        }
      } else {
        on_start(tag);
      }
    }
    flush_anchor();
    scan_.main_text = normalize_space(text_);
    return std::move(scan_);
  }

 private:
  void on_text(std::string_view t) {
    if (excluded_ == 0) text_ += t;
    if (heading_level_ > 0) heading_buf_ += t;
    if (anchor_open_) anchor_buf_ += t;
  }

  void on_start(const Tag& tag) {
    const auto& n = tag.name;
    if (is_block_tag(n)) on_text(" ");
    if (n == "html") {
      if (const auto* lang = tag.attr("lang")) scan_.language = std::string(trim(*lang));
    } else if (n == "base") {
      if (const auto* href = tag.attr("href"); href && !scan_.base_href) scan_.base_href = *href;
    } else if (n == "a") {
      flush_anchor();
      if (const auto* href = tag.attr("href")) {
        scan_.hrefs.push_back({*href, {}});
        anchor_open_ = true;
        anchor_buf_.clear();
      }
    } else if (n.size() == 2 && n[0] == 'h' && n[1] >= '1' && n[1] <= '6') {
      heading_level_ = n[1] - '0';
      heading_buf_.clear();
    } else if (is_excluded_region(n) && !tag.self_closing) {
      ++excluded_;
    }
  }

  void on_end(const std::string& n) {
    if (n == "a") {
      flush_anchor();
    } else if (n.size() == 2 && n[0] == 'h' && n[1] >= '1' && n[1] <= '6' && heading_level_ > 0) {
      auto text = normalize_space(heading_buf_);
      if (!text.empty() && excluded_ == 0) scan_.headings.push_back({heading_level_, std::move(text)});
      heading_level_ = 0;
    } else if (is_excluded_region(n) && excluded_ > 0) {
      --excluded_;
    }
    if (is_block_tag(n)) on_text(" ");
  }

  void flush_anchor() {
    if (!anchor_open_) return;
    scan_.hrefs.back().anchor = normalize_space(anchor_buf_);
    anchor_open_ = false;
  }

  std::string_view html_;
  HtmlScan scan_;
  std::string text_;
  int excluded_ = 0;
  int heading_level_ = 0;
  std::string heading_buf_;
  bool anchor_open_ = false;
  std::string anchor_buf_;
};

std::string strip_tags(std::string_view html) {
  std::string out;
  bool in_tag = false;
  for (char c : html) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return normalize_space(decode_entities(out));
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    std::string_view name = text.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = name.size() > 1;
      bool hex = ok && (name[1] == 'x' || name[1] == 'X');
      for (std::size_t j = hex ? 2 : 1; j < name.size() && ok; ++j) {
        auto c = static_cast<unsigned char>(name[j]);
        if (hex && std::isxdigit(c)) {
          cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(c) ? c - '0' : std::tolower(c) - 'a' + 10);
        } else if (!hex && std::isdigit(c)) {
          cp = cp * 10 + (c - '0');
        } else {
          ok = false;
        }
        if (cp > 0x10FFFF) ok = false;
      }
      if (ok && name.size() > (hex ? 2u : 1u)) {
        append_utf8(out, cp);
        i = semi;
        continue;
      }
    } else if (auto it = named_entities().find(name); it != named_entities().end()) {
      append_utf8(out, it->second);
      i = semi;
      continue;
    }
    out.push_back('&');
  }
  return out;
}

HtmlScan scan_html(std::string_view html) { return Scanner(html).run(); }

bool is_html_content_type(std::string_view content_type) {
  auto ct = to_lower(trim(content_type.substr(0, content_type.find(';'))));
  return ct == "text/html" || ct == "application/xhtml+xml";
}

PageContent extract_structure(const RawPage& page) {
  PageContent content;
  if (trim(page.body).empty()) return content;

  HtmlScan scan;
  try {
    scan = scan_html(page.body);
  } catch (const std::exception&) {
    content.main_text = strip_tags(page.body);
    return content;
  }

  content.language = scan.language.empty() ? "und" : scan.language;
  content.headings = scan.headings;
  content.main_text = scan.main_text;
  if (!scan.title.empty()) {
    content.title = scan.title;
  } else if (auto h1 = std::find_if(scan.headings.begin(), scan.headings.end(),
                                    [](const Heading& h) { return h.level == 1; });
             h1 != scan.headings.end()) {
    content.title = h1->text;
  } else if (!page.url.empty()) {
    content.title = std::string(page.url.path());
  }

  // first anchor text per canonical target; order and membership come from out_links
  Url base = page.url;
  if (scan.base_href && !page.url.empty()) {
    try {
      base = canonicalize_url(*scan.base_href, page.url);
    } catch (const Error&) {
    }
  }
  std::unordered_map<std::string, std::string> anchors;
  if (!base.empty()) {
    for (const auto& h : scan.hrefs) {
      try {
        auto u = canonicalize_url(h.href, base);
        anchors.try_emplace(u.str(), h.anchor);
      } catch (const Error&) {
      }
    }
  }
  for (const auto& target : page.out_links) {
    auto it = anchors.find(target.str());
    content.links.push_back({it == anchors.end() ? std::string{} : it->second, target});
  }
  return content;
}

std::string render_for_prompt(const PageContent& c, std::size_t clip) {
  std::string out = "Title: " + c.title + "\nHeadings: ";
  for (std::size_t i = 0; i < c.headings.size(); ++i) {
    if (i) out += "; ";
    out += c.headings[i].text;
  }
  out += "\nLinks: ";
  bool first = true;
  for (const auto& l : c.links) {
    if (l.anchor.empty()) continue;
    if (!first) out += " | ";
    out += l.anchor;
    first = false;
  }
  out += "\nText: " + utf8_clip(c.main_text, clip);
  return out;
}

std::string content_digest(const PageContent& c) { return sha256_hex(render_for_prompt(c)); }

std::string build_describe_prompt(const PageContent& content) {
  return "Summarize the webpage below in at most 60 words. Name the page's function and its key "
         "entities. Reply with the summary only.\n\n" +
         render_for_prompt(content);
}

Description describe_page(const PageContent& content, LlmClient& client) {
  try {
    auto reply = client.chat(build_describe_prompt(content), "describe");
    auto text = clip_words(reply, kDescriptionMaxWords);
    if (!text.empty()) return {std::move(text), false};
  } catch (const Error& e) {
    if (e.code() != Errc::provider_error) throw;
  }
  std::string fb = content.title;
  if (!content.headings.empty()) {
    if (!fb.empty()) fb += " ";
    fb += content.headings.front().text;
  }
  return {normalize_space(fb), true};
}

}  // namespace forge
