#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace forge {

/// An absolute http(s) URL in canonical form: lowercase scheme and host,
/// default port dropped, dot segments removed, path percent-escapes
/// normalized, query kept verbatim, fragment dropped.
///
/// Instances can only be produced by canonicalize_url(), so holding a Url
/// means holding a canonical string.
class Url {
 public:
  Url() = default;

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  std::string_view scheme() const;
  std::string_view host() const;
  /// Explicit non-default port or 0.
  int port() const noexcept { return port_; }
  std::string_view path() const;
  /// Query without the leading '?', empty when absent.
  std::string_view query() const;
  bool has_query() const noexcept { return query_begin_ != std::string::npos; }
  /// Path plus "?query" when present; what robots rules match against.
  std::string_view path_and_query() const;
  /// scheme://host[:port]
  std::string origin() const;

  friend bool operator==(const Url& a, const Url& b) { return a.text_ == b.text_; }
  friend auto operator<=>(const Url& a, const Url& b) { return a.text_ <=> b.text_; }

 private:
  friend Url canonicalize_url(std::string_view raw, const Url* base);

  std::string text_;
  std::size_t scheme_end_ = 0;  // index of ':'
  std::size_t host_begin_ = 0;
  std::size_t host_end_ = 0;
  std::size_t path_begin_ = 0;
  std::size_t query_begin_ = std::string::npos;  // index of '?'
  int port_ = 0;
};

/// Resolves `raw` (relative or absolute) against `base` and canonicalizes
/// it. Throws Error(malformed_url) when the reference cannot be resolved,
/// the scheme is not http/https, or the authority is unusable.
Url canonicalize_url(std::string_view raw, const Url& base);

/// Canonicalizes an absolute reference; relative input is malformed-url.
Url canonicalize_url(std::string_view absolute);

Url canonicalize_url(std::string_view raw, const Url* base);

/// Registrable domain of a host: the last two labels, or three when the
/// second-level label is a generic one under a two-letter country code
/// ("shop.example.co.uk" -> "example.co.uk"). IP literals and single-label
/// hosts are returned unchanged.
std::string registrable_domain(std::string_view host);

}  // namespace forge

template <>
struct std::hash<forge::Url> {
  std::size_t operator()(const forge::Url& u) const noexcept {
    return std::hash<std::string>{}(u.str());
  }
};
