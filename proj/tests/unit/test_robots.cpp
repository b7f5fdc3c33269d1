#include <gtest/gtest.h>

#include "forge/crawler/robots.hpp"

using namespace forge;

TEST(Robots, LongestMatchWins) {
  auto r = RobotsRules::parse(
      "User-agent: *\n"
      "Disallow: /private/\n"
      "Allow: /private/open/\n"
      "Disallow: /*.pdf$\n",
      "forge-crawler/0.1");
  EXPECT_TRUE(r.allowed("/index.html"));
  EXPECT_FALSE(r.allowed("/private/x.html"));
  EXPECT_TRUE(r.allowed("/private/open/x.html"));
  EXPECT_FALSE(r.allowed("/docs/a.pdf"));
  EXPECT_TRUE(r.allowed("/docs/a.pdf?x=1"));
}

TEST(Robots, AllowWinsTies) {
  auto r = RobotsRules::parse("User-agent: *\nDisallow: /a\nAllow: /a\n", "x");
  EXPECT_TRUE(r.allowed("/a"));
}

TEST(Robots, GroupSelection) {
  const char* txt =
      "User-agent: badbot\n"
      "Disallow: /\n"
      "\n"
      "User-agent: forge-crawler\n"
      "Disallow: /cart\n"
      "\n"
      "User-agent: *\n"
      "Disallow: /tmp\n";
  auto ours = RobotsRules::parse(txt, "Forge-Crawler/0.1");
  EXPECT_FALSE(ours.allowed("/cart"));
  EXPECT_TRUE(ours.allowed("/tmp"));
  auto bad = RobotsRules::parse(txt, "BadBot/2");
  EXPECT_FALSE(bad.allowed("/index.html"));
  auto other = RobotsRules::parse(txt, "someone/1");
  EXPECT_FALSE(other.allowed("/tmp/x"));
  EXPECT_TRUE(other.allowed("/cart"));
}

TEST(Robots, EmptyAndComments) {
  EXPECT_TRUE(RobotsRules::allow_all().allowed("/anything"));
  auto r = RobotsRules::parse("# nothing\nUser-agent: * # all\nDisallow:\n", "x");
  EXPECT_TRUE(r.allowed("/x"));
  EXPECT_EQ(r.rule_count(), 0u);
}

TEST(Robots, Wildcards) {
  auto r = RobotsRules::parse("User-agent: *\nDisallow: /*/secret\nAllow: /$\n", "x");
  EXPECT_FALSE(r.allowed("/a/b/secret.html"));
  EXPECT_TRUE(r.allowed("/"));
  EXPECT_TRUE(r.allowed("/secret"));
}
