#include <gtest/gtest.h>

#include <set>

#include "forge/crawler/crawl.hpp"
#include "forge/error.hpp"
#include "forge/extract.hpp"
#include "forge/llm/client.hpp"
#include "forge/llm/stub.hpp"
#include "forge/util.hpp"
#include "support/fixture_server.hpp"
#include "support/oracles.hpp"

using namespace forge;
using forge::testing::fixture_site;
using forge::testing::kFixtureRoot;

namespace {

RawPage fixture_page(const std::string& rel) {
  FetchResult r;
  r.status = 200;
  r.content_type = "text/html; charset=utf-8";
  r.body = forge::testing::slurp(fixture_site() / rel);
  auto root = canonicalize_url(kFixtureRoot);
  return to_raw_page(canonicalize_url("/" + rel, root), r, root, ScopeRule::registrable_domain);
}

RawPage html_page(const std::string& body) {
  RawPage p;
  p.url = canonicalize_url("http://x.test/p.html");
  p.status = 200;
  p.content_type = "text/html";
  p.body = body;
  return p;
}

ProviderConfig quiet_config() {
  ProviderConfig c;
  c.retry_backoff = std::chrono::milliseconds(0);
  return c;
}

}  // namespace

TEST(Extract, FixtureProductPage) {
  auto c = extract_structure(fixture_page("footwear/cleats/ua-blur-pro.html"));
  EXPECT_EQ(c.title, "UA Blur Pro");
  EXPECT_EQ(c.headings.size(), 2u);
  EXPECT_EQ(c.links.size(), 5u);
  EXPECT_EQ(c.language, "en");
  EXPECT_EQ(c.main_text.find('<'), std::string::npos);
}

TEST(Extract, LinksMirrorOutLinksOnEveryFixturePage) {
  auto oracle = forge::testing::fixture_links(fixture_site());
  for (const auto& entry : std::filesystem::recursive_directory_iterator(fixture_site())) {
    if (entry.path().extension() != ".html") continue;
    auto rel = std::filesystem::relative(entry.path(), fixture_site()).generic_string();
    auto page = fixture_page(rel);
    auto c = extract_structure(page);
    ASSERT_EQ(c.links.size(), page.out_links.size()) << rel;
    for (std::size_t i = 0; i < c.links.size(); ++i) EXPECT_EQ(c.links[i].url, page.out_links[i]) << rel;
    // the independent href oracle agrees on the target set
    EXPECT_EQ(c.links.size(), oracle.at("/" + rel).size()) << rel;
  }
}

TEST(Extract, EmptyBody) {
  auto c = extract_structure(html_page(""));
  EXPECT_TRUE(c.headings.empty());
  EXPECT_TRUE(c.links.empty());
  EXPECT_TRUE(c.main_text.empty());
  EXPECT_EQ(c.language, "und");
}

TEST(Extract, DeclaredLanguageSingleParagraph) {
  auto c = extract_structure(html_page("<html lang=\"de\"><body><p>Hallo Welt</p></body></html>"));
  EXPECT_EQ(c.language, "de");
  EXPECT_EQ(c.main_text, "Hallo Welt");
}

TEST(Extract, TitleFallbacks) {
  EXPECT_EQ(extract_structure(html_page("<h2>x</h2><h1>Main &amp; Co</h1>")).title, "Main & Co");
  EXPECT_EQ(extract_structure(html_page("<p>no title</p>")).title, "/p.html");
}

TEST(Extract, BoilerplateRegionsExcluded) {
  auto c = extract_structure(html_page(
      "<html><head><style>.a{}</style><script>var x = '<p>';</script></head><body>"
      "<nav>Menu Home</nav><main><h1>Real</h1><p>Body  text\n here.</p></main>"
      "<footer>Copyright</footer></body></html>"));
  EXPECT_EQ(c.main_text, "Real Body text here.");
}

TEST(Extract, MalformedMarkupDoesNotThrow) {
  forge::testing::TestRng rng(5);
  const std::string alphabet = "<>/=\"' abcdeh1p&;!-";
  for (int i = 0; i < 300; ++i) {
    std::string body;
    for (int j = rng.below(200); j > 0; --j) body += alphabet[rng.below(static_cast<int>(alphabet.size()))];
    auto page = html_page(body);
    PageContent a, b;
    ASSERT_NO_THROW(a = extract_structure(page));
    b = extract_structure(page);
    EXPECT_EQ(a, b);
  }
}

TEST(Extract, RenderForPromptClipsText) {
  PageContent c;
  c.title = "T";
  c.main_text = std::string(5000, 'x');
  auto r = render_for_prompt(c);
  EXPECT_NE(r.find("Title: T"), std::string::npos);
  EXPECT_EQ(r.size() - r.find("Text: ") - 6, kPromptTextClip);
}

TEST(Describe, ScriptedEchoOfTitle) {
  auto stub = StubProvider::from_script(R"j({"match": "Title: ([^\n]*)", "response": "DESC($1)"})j");
  LlmClient client(quiet_config(), stub);
  auto c = extract_structure(fixture_page("footwear/cleats/ua-blur-pro.html"));
  auto d = describe_page(c, client);
  EXPECT_EQ(d.text, "DESC(UA Blur Pro)");
  EXPECT_FALSE(d.fallback);
}

TEST(Describe, OutageFallsBackToTitleAndHeading) {
  auto stub = StubProvider::from_script(R"({"match": ".", "error": "down"})");
  LlmClient client(quiet_config(), stub);
  PageContent c;
  c.title = "UA Blur Pro";
  c.headings = {{1, "Lightweight cleat"}, {2, "Specs"}};
  auto d = describe_page(c, client);
  EXPECT_TRUE(d.fallback);
  EXPECT_EQ(d.text, "UA Blur Pro Lightweight cleat");
}

TEST(Describe, ClipsToSixtyWords) {
  std::string many;
  for (int i = 0; i < 100; ++i) many += "w" + std::to_string(i) + " ";
  auto stub = StubProvider::from_script(R"({"match": ".", "response": ")" + many + R"("})");
  LlmClient client(quiet_config(), stub);
  auto d = describe_page(PageContent{}, client);
  EXPECT_EQ(split_words(d.text).size(), kDescriptionMaxWords);
}

TEST(Describe, OneWireCallPerDistinctContent) {
  auto stub = StubProvider::from_script(R"j({"match": "Title: ([^\n]*)", "response": "DESC($1)"})j");
  LlmClient client(quiet_config(), stub);
  std::set<std::string> digests;
  std::size_t pages = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(fixture_site())) {
    if (entry.path().extension() != ".html") continue;
    auto rel = std::filesystem::relative(entry.path(), fixture_site()).generic_string();
    auto c = extract_structure(fixture_page(rel));
    digests.insert(content_digest(c));
    describe_page(c, client);
    describe_page(c, client);
    ++pages;
  }
  EXPECT_EQ(client.ledger().calls("describe"), 2 * pages);
  EXPECT_EQ(client.ledger().wire_calls("describe"), digests.size());
}
