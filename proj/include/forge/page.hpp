#pragma once

#include <string>
#include <vector>

#include "forge/crawler/url.hpp"

namespace forge {

/// One fetched (or replayed) response. `status` is 0 when the fetch never
/// produced a response.
struct RawPage {
  Url url;
  std::string fetched_at;
  int status = 0;
  std::string body;
  std::string content_type;
  /// In-scope canonical targets in document order, no duplicates.
  std::vector<Url> out_links;
};

struct Heading {
  int level = 1;
  std::string text;
  friend bool operator==(const Heading&, const Heading&) = default;
};

struct PageLink {
  std::string anchor;
  Url url;
  friend bool operator==(const PageLink&, const PageLink&) = default;
};

/// Structural projection of a page: what downstream prompts consume.
struct PageContent {
  std::string title;
  std::vector<Heading> headings;
  std::vector<PageLink> links;
  std::string main_text;
  std::string language = "und";

  friend bool operator==(const PageContent&, const PageContent&) = default;
};

}  // namespace forge
