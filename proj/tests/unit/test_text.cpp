#include <doctest.h>

#include "entstats/text.hpp"

using namespace entstats;

TEST_CASE("tokenize lowercases and splits on punctuation boundaries") {
    CHECK(tokenize("Amazon.com has STORES!") ==
          std::vector<std::string>{"amazon", "com", "has", "stores"});
    CHECK(tokenize("  spaced\tout\nwords ") == std::vector<std::string>{"spaced", "out", "words"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("...").empty());
    CHECK(tokenize("route66") == std::vector<std::string>{"route66"});
}

TEST_CASE("bag round trip") {
    const auto tokens = tokenize("the cat and the hat");
    const TokenBag bag = make_bag(tokens);
    CHECK(bag.at("the") == 2);
    CHECK(make_bag(bag_to_tokens(bag)) == bag);
}

TEST_CASE("join and split are inverse on normalized surfaces") {
    const std::vector<std::string> tokens{"new", "york", "city"};
    CHECK(split_tokens(join_tokens(tokens)) == tokens);
    CHECK(join_tokens({}) == "");
    CHECK(split_tokens("").empty());
}
