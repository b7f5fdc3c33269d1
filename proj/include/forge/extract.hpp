#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/page.hpp"

namespace forge {

class LlmClient;

/// An <a href> as written in the document, with its anchor text.
struct RawHref {
  std::string href;
  std::string anchor;
};

/// Result of one tolerant pass over an HTML document.
struct HtmlScan {
  std::string title;
  std::string language;  // empty when undeclared
  std::optional<std::string> base_href;
  std::vector<Heading> headings;
  std::vector<RawHref> hrefs;
  std::string main_text;
};

/// Never throws on malformed markup; unclosed elements run to end of input.
HtmlScan scan_html(std::string_view html);

std::string decode_entities(std::string_view text);

bool is_html_content_type(std::string_view content_type);

/// Pure function of the page bytes (and the page's out_links, which fix the
/// order and membership of `links`).
PageContent extract_structure(const RawPage& page);

/// Characters of main_text passed to generation prompts.
inline constexpr std::size_t kPromptTextClip = 4000;
inline constexpr std::size_t kDescriptionMaxWords = 60;

/// Title, headings, link anchors, and main text clipped to `clip` code points.
std::string render_for_prompt(const PageContent& content, std::size_t clip = kPromptTextClip);

/// Digest identifying the content a description is derived from.
std::string content_digest(const PageContent& content);

struct Description {
  std::string text;
  bool fallback = false;
};

std::string build_describe_prompt(const PageContent& content);

/// One chat call (stage "describe") per distinct content; provider failure
/// degrades to title + first heading with `fallback` set.
Description describe_page(const PageContent& content, LlmClient& client);

}  // namespace forge
