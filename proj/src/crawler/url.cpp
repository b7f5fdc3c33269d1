#include "forge/crawler/url.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <vector>

#include "forge/error.hpp"
#include "forge/util.hpp"

namespace forge {

namespace {

struct Reference {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
};

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

bool is_path_char(unsigned char c) {
  if (is_unreserved(c)) return true;
  switch (c) {
    case '!': case '$': case '&': case '\'': case '(': case ')': case '*':
    case '+': case ',': case ';': case '=': case ':': case '@': case '/':
      return true;
    default:
      return false;
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

constexpr char kHexUpper[] = "0123456789ABCDEF";

void append_escape(std::string& out, unsigned char c) {
  out.push_back('%');
  out.push_back(kHexUpper[c >> 4]);
  out.push_back(kHexUpper[c & 0xF]);
}

// Decodes escapes of unreserved characters, uppercases the rest, and
// escapes bytes that are not legal in a path.
std::string normalize_path_escapes(std::string_view path) {
  std::string out;
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto c = static_cast<unsigned char>(path[i]);
    if (c == '%') {
      int hi = i + 2 < path.size() ? hex_value(path[i + 1]) : -1;
      int lo = i + 2 < path.size() ? hex_value(path[i + 2]) : -1;
      if (hi >= 0 && lo >= 0) {
        auto decoded = static_cast<unsigned char>(hi * 16 + lo);
        if (is_unreserved(decoded)) {
          out.push_back(static_cast<char>(decoded));
        } else {
          append_escape(out, decoded);
        }
        i += 2;
      } else {
        append_escape(out, '%');
      }
    } else if (is_path_char(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      append_escape(out, c);
    }
  }
  return out;
}

std::string remove_dot_segments(std::string_view input) {
  std::vector<std::string_view> segments;
  bool absolute = !input.empty() && input.front() == '/';
  bool trailing_slash = false;
  std::size_t pos = absolute ? 1 : 0;
  while (pos <= input.size()) {
    std::size_t next = input.find('/', pos);
    std::string_view seg =
        input.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    bool last = next == std::string_view::npos;
    if (seg == ".") {
      trailing_slash = last;
    } else if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
      trailing_slash = last;
    } else {
      segments.push_back(seg);
      trailing_slash = false;
    }
    if (last) break;
    pos = next + 1;
  }
  std::string out = absolute ? "/" : "";
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out.push_back('/');
    out += segments[i];
  }
  if (trailing_slash && !out.empty() && out.back() != '/') out.push_back('/');
  return out;
}

Reference parse_reference(std::string_view s) {
  Reference r;
  // scheme
  std::size_t colon = s.find(':');
  std::size_t first_delim = s.find_first_of("/?#");
  if (colon != std::string_view::npos && colon > 0 &&
      (first_delim == std::string_view::npos || colon < first_delim) &&
      std::isalpha(static_cast<unsigned char>(s[0]))) {
    bool valid = std::all_of(s.begin(), s.begin() + static_cast<long>(colon), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    });
    if (valid) {
      r.scheme = to_lower(s.substr(0, colon));
      s.remove_prefix(colon + 1);
    }
  }
  if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  if (auto q = s.find('?'); q != std::string_view::npos) {
    r.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  if (s.starts_with("//")) {
    s.remove_prefix(2);
    std::size_t slash = s.find('/');
    r.authority = std::string(s.substr(0, slash));
    s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);
  }
  r.path = std::string(s);
  return r;
}

std::string merge_paths(std::string_view base_path, std::string_view ref_path, bool base_has_authority) {
  if (base_has_authority && base_path.empty()) return "/" + std::string(ref_path);
  auto slash = base_path.rfind('/');
  if (slash == std::string_view::npos) return std::string(ref_path);
  return std::string(base_path.substr(0, slash + 1)) + std::string(ref_path);
}

std::string strip_controls(std::string_view raw) {
  std::string out;
  auto t = trim(raw);
  out.reserve(t.size());
  for (char c : t) {
    if (c != '\t' && c != '\n' && c != '\r') out.push_back(c);
  }
  return out;
}

}  // namespace

Url canonicalize_url(std::string_view raw_in, const Url* base) {
  const std::string raw = strip_controls(raw_in);
  Reference ref = parse_reference(raw);

  std::string scheme;
  std::string authority;
  std::string path;
  std::optional<std::string> query;

  if (ref.scheme) {
    scheme = *ref.scheme;
    if (!ref.authority) throw Error(Errc::malformed_url, "missing authority: " + raw);
    authority = *ref.authority;
    path = remove_dot_segments(normalize_path_escapes(ref.path));
    query = ref.query;
  } else {
    if (base == nullptr || base->empty()) {
      throw Error(Errc::malformed_url, "relative reference without base: " + raw);
    }
    scheme = std::string(base->scheme());
    if (ref.authority) {
      authority = *ref.authority;
      path = remove_dot_segments(normalize_path_escapes(ref.path));
      query = ref.query;
    } else {
      const std::string& b = base->str();
      authority = b.substr(base->scheme().size() + 3,
                           base->path().data() - b.data() - base->scheme().size() - 3);
      if (ref.path.empty()) {
        path = std::string(base->path());
        query = ref.query ? ref.query
                          : (base->has_query() ? std::optional<std::string>(std::string(base->query()))
                                               : std::nullopt);
      } else {
        std::string p = normalize_path_escapes(ref.path);
        if (p.front() != '/') p = merge_paths(base->path(), p, true);
        path = remove_dot_segments(p);
        query = ref.query;
      }
    }
  }

  if (scheme != "http" && scheme != "https") {
    throw Error(Errc::malformed_url, "unsupported scheme '" + scheme + "' in " + raw);
  }

  // authority: [userinfo@]host[:port]
  std::string userinfo;
  if (auto at = authority.rfind('@'); at != std::string::npos) {
    userinfo = authority.substr(0, at + 1);
    authority = authority.substr(at + 1);
  }
  std::string host = authority;
  std::string port_text;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string::npos) throw Error(Errc::malformed_url, "bad IPv6 literal in " + raw);
    host = authority.substr(0, close + 1);
    if (close + 1 < authority.size()) {
      if (authority[close + 1] != ':') throw Error(Errc::malformed_url, "bad authority in " + raw);
      port_text = authority.substr(close + 2);
    }
  } else if (auto c = authority.rfind(':'); c != std::string::npos) {
    host = authority.substr(0, c);
    port_text = authority.substr(c + 1);
  }
  host = to_lower(host);
  if (host.empty()) throw Error(Errc::malformed_url, "empty host in " + raw);
  for (char ch : host) {
    auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u) || ch == '/' || ch == '\\' || ch == '?' || ch == '#' || ch == '%') {
      throw Error(Errc::malformed_url, "invalid host in " + raw);
    }
  }
  int port = 0;
  if (!port_text.empty()) {
    if (port_text.size() > 5 ||
        !std::all_of(port_text.begin(), port_text.end(),
                     [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      throw Error(Errc::malformed_url, "invalid port in " + raw);
    }
    port = std::stoi(port_text);
    if (port > 65535) throw Error(Errc::malformed_url, "port out of range in " + raw);
    if ((scheme == "http" && port == 80) || (scheme == "https" && port == 443)) port = 0;
  }
  if (path.empty()) path = "/";

  Url u;
  u.text_ = scheme + "://" + userinfo;
  u.scheme_end_ = scheme.size();
  u.host_begin_ = u.text_.size();
  u.text_ += host;
  u.host_end_ = u.text_.size();
  if (port != 0) u.text_ += ":" + std::to_string(port);
  u.port_ = port;
  u.path_begin_ = u.text_.size();
  u.text_ += path;
  if (query) {
    u.query_begin_ = u.text_.size();
    u.text_ += "?" + *query;
  }
  return u;
}

Url canonicalize_url(std::string_view raw, const Url& base) { return canonicalize_url(raw, &base); }

Url canonicalize_url(std::string_view absolute) { return canonicalize_url(absolute, nullptr); }

std::string_view Url::scheme() const { return std::string_view(text_).substr(0, scheme_end_); }

std::string_view Url::host() const {
  return std::string_view(text_).substr(host_begin_, host_end_ - host_begin_);
}

std::string_view Url::path() const {
  auto end = query_begin_ == std::string::npos ? text_.size() : query_begin_;
  return std::string_view(text_).substr(path_begin_, end - path_begin_);
}

std::string_view Url::query() const {
  if (query_begin_ == std::string::npos) return {};
  return std::string_view(text_).substr(query_begin_ + 1);
}

std::string_view Url::path_and_query() const { return std::string_view(text_).substr(path_begin_); }

std::string Url::origin() const { return text_.substr(0, path_begin_); }

std::string registrable_domain(std::string_view host_in) {
  std::string host(host_in);
  if (host.empty() || host.front() == '[') return host;
  if (std::all_of(host.begin(), host.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; })) {
    return host;
  }
  std::vector<std::string_view> labels;
  std::string_view rest = host;
  while (true) {
    auto dot = rest.find('.');
    labels.push_back(rest.substr(0, dot));
    if (dot == std::string_view::npos) break;
    rest.remove_prefix(dot + 1);
  }
  if (labels.size() <= 2) return host;
  static constexpr std::string_view kGenericSecondLevel[] = {"co", "com", "org", "net", "gov",
                                                            "ac", "edu", "or", "ne", "go"};
  const auto& tld = labels.back();
  const auto& sld = labels[labels.size() - 2];
  std::size_t keep = 2;
  if (tld.size() == 2 &&
      std::find(std::begin(kGenericSecondLevel), std::end(kGenericSecondLevel), sld) !=
          std::end(kGenericSecondLevel)) {
    keep = 3;
  }
  if (labels.size() <= keep) return host;
  std::string out;
  for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
    if (!out.empty()) out.push_back('.');
    out += labels[i];
  }
  return out;
}

}  // namespace forge
