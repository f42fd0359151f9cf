#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace webparf {

// A raw href value exactly as it appeared in a document. No guarantees.
struct RawHref {
  std::string text;
};

// Normalized absolute URL. Instances produced by canonicalize()/resolve()
// satisfy: lowercase scheme and host, no default port, path free of dot
// segments and never empty, no fragment. The rendered string is the identity
// used for deduplication everywhere in the system.
struct CanonicalUrl {
  std::string scheme;           // "http" or "https"
  std::string host;             // lowercase
  std::optional<int> port;      // absent when scheme-default
  std::string path;             // starts with "/"
  std::optional<std::string> query;  // preserved byte-for-byte

  bool operator==(const CanonicalUrl&) const = default;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

inline bool is_hex_digit(char c) {
  return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

// Uppercases the hex digits of percent-encoded triplets, leaving everything
// else untouched (no decoding, no re-encoding).
inline std::string normalize_percent_triplets(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i + 2 < out.size(); ++i) {
    if (out[i] == '%' && is_hex_digit(out[i + 1]) && is_hex_digit(out[i + 2])) {
      out[i + 1] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[i + 1])));
      out[i + 2] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[i + 2])));
      i += 2;
    }
  }
  return out;
}

// RFC 3986 section 5.2.4 remove_dot_segments.
inline std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0) {
      in.replace(0, 4, "/");
      auto slash = out.find_last_of('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "/..") {
      in = "/";
      auto slash = out.find_last_of('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t start = in[0] == '/' ? 1 : 0;
      std::size_t next = in.find('/', start);
      if (next == std::string::npos) next = in.size();
      out.append(in, 0, next);
      in.erase(0, next);
    }
  }
  return out;
}

// RFC 3986 section 5.2.3 merge paths.
inline std::string merge_paths(const CanonicalUrl& base, std::string_view ref_path) {
  auto slash = base.path.find_last_of('/');
  if (slash == std::string::npos) return "/" + std::string(ref_path);
  return base.path.substr(0, slash + 1) + std::string(ref_path);
}

// Decomposed URI reference prior to normalization. Components are optional
// in the RFC sense: an absent component is different from an empty one.
struct UriParts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
};

inline bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  return true;
}

// Splits any URI reference into its components (RFC 3986 appendix B), with
// the fragment discarded on the spot.
inline UriParts split_reference(std::string_view ref) {
  UriParts parts;
  if (auto hash = ref.find('#'); hash != std::string_view::npos) ref = ref.substr(0, hash);

  auto colon = ref.find(':');
  auto slash = ref.find('/');
  auto question = ref.find('?');
  if (colon != std::string_view::npos &&
      (slash == std::string_view::npos || colon < slash) &&
      (question == std::string_view::npos || colon < question) &&
      valid_scheme(ref.substr(0, colon))) {
    parts.scheme = std::string(ref.substr(0, colon));
    ref = ref.substr(colon + 1);
  }

  if (ref.rfind("//", 0) == 0) {
    ref = ref.substr(2);
    auto end = ref.find_first_of("/?");
    parts.authority = std::string(ref.substr(0, end));
    ref = end == std::string_view::npos ? std::string_view{} : ref.substr(end);
  }

  if (auto q = ref.find('?'); q != std::string_view::npos) {
    parts.query = std::string(ref.substr(q + 1));
    ref = ref.substr(0, q);
  }
  parts.path = std::string(ref);
  return parts;
}

inline std::optional<CanonicalUrl> assemble(const UriParts& parts) {
  if (!parts.scheme || !parts.authority) return std::nullopt;
  std::string scheme = ascii_lower(*parts.scheme);
  if (scheme != "http" && scheme != "https") return std::nullopt;

  // authority = [userinfo "@"] host [":" port]; userinfo is dropped.
  std::string_view auth = *parts.authority;
  if (auto at = auth.find_last_of('@'); at != std::string_view::npos) auth = auth.substr(at + 1);
  std::optional<int> port;
  if (auto colon = auth.find(':'); colon != std::string_view::npos) {
    std::string_view digits = auth.substr(colon + 1);
    auth = auth.substr(0, colon);
    if (!digits.empty()) {
      int value = 0;
      for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        value = value * 10 + (c - '0');
        if (value > 65535) return std::nullopt;
      }
      port = value;
    }
  }
  std::string host = ascii_lower(auth);
  if (host.empty() || host.find_first_of("[]") != std::string::npos) return std::nullopt;

  int default_port = scheme == "http" ? 80 : 443;
  if (port && *port == default_port) port.reset();

  std::string path = normalize_percent_triplets(remove_dot_segments(parts.path));
  if (path.empty()) path = "/";

  CanonicalUrl url;
  url.scheme = std::move(scheme);
  url.host = std::move(host);
  url.port = port;
  url.path = std::move(path);
  if (parts.query) url.query = normalize_percent_triplets(*parts.query);
  return url;
}

}  // namespace detail

// Renders the canonical form: scheme "://" host [":" port] path ["?" query].
inline std::string render(const CanonicalUrl& u) {
  std::string out = u.scheme + "://" + u.host;
  if (u.port) out += ":" + std::to_string(*u.port);
  out += u.path;
  if (u.query) out += "?" + *u.query;
  return out;
}

// Parses an absolute http/https URL into canonical form. Returns nullopt on
// anything malformed: missing or unsupported scheme, empty host, bad port.
inline std::optional<CanonicalUrl> canonicalize(std::string_view raw) {
  return detail::assemble(detail::split_reference(raw));
}

// RFC 3986 section 5 reference resolution against a canonical base, followed
// by canonicalization. Strict interpretation: a same-scheme reference without
// authority ("http:g") does not inherit the base authority and is rejected.
inline std::optional<CanonicalUrl> resolve(const CanonicalUrl& base, const RawHref& reference) {
  detail::UriParts ref = detail::split_reference(reference.text);
  detail::UriParts target;

  if (ref.scheme) {
    target = ref;
  } else {
    target.scheme = base.scheme;
    if (ref.authority) {
      target.authority = ref.authority;
      target.path = ref.path;
      target.query = ref.query;
    } else {
      std::string auth = base.host;
      if (base.port) auth += ":" + std::to_string(*base.port);
      target.authority = auth;
      if (ref.path.empty()) {
        target.path = base.path;
        target.query = ref.query ? ref.query : base.query;
      } else {
        target.path = ref.path[0] == '/' ? ref.path : detail::merge_paths(base, ref.path);
        target.query = ref.query;
      }
    }
  }
  return detail::assemble(target);
}

// Host under which politeness and repository partitioning are keyed.
inline const std::string& host_of(const CanonicalUrl& u) { return u.host; }

}  // namespace webparf
