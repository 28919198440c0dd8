#include <catch2/catch_amalgamated.hpp>

#include "divlab/bitstring.hpp"
#include "divlab/population.hpp"
#include "divlab/rng.hpp"

using namespace divlab;

TEST_CASE("hamming distance counts differing positions") {
    CHECK(hamming(BitString::from_string("000"), BitString::from_string("000")) == 0);
    CHECK(hamming(BitString::from_string("110"), BitString::from_string("101")) == 2);

    const auto x = BitString::from_string("1011001");
    CHECK(hamming(x, x.complement()) == 7);
    CHECK(hamming(x, x.complement()) == hamming(x.complement(), x));

    CHECK_THROWS_AS(hamming(BitString(3), BitString(4)), UsageError);
}

TEST_CASE("bitstring round trips and bit access") {
    const auto x = BitString::from_string("0110");
    CHECK(x.to_string() == "0110");
    CHECK(x.value() == 0b0110);  // position 0 is the least significant bit
    CHECK(BitString::from_value(x.value(), 4) == x);
    CHECK(x.count_ones() == 2);
    CHECK(x.one_positions() == std::vector<std::size_t>{1, 2});
    CHECK(x.complement().to_string() == "1001");
    CHECK_THROWS_AS(BitString::from_string("012"), UsageError);
}

TEST_CASE("bitstring works beyond one word") {
    Rng rng(7);
    const auto a = BitString::random(150, rng);
    const auto b = BitString::random(150, rng);
    CHECK(hamming(a, b) == (a ^ b).count_ones());
    CHECK(a.complement().complement() == a);
    CHECK(hamming(a, a.complement()) == 150);
}

TEST_CASE("point diversity sums distances to every member") {
    const Population two(std::vector<BitString>(2, BitString::from_string("000")));
    CHECK(two.point_diversity(BitString::from_string("000")) == 0);

    const Population p({BitString::from_string("000"), BitString::from_string("011"),
                        BitString::from_string("101")});
    CHECK(p.point_diversity(BitString::from_string("000")) == 4);
    CHECK(p.point_diversity(BitString::from_string("111")) == 5);
    CHECK_THROWS_AS(p.point_diversity(BitString(4)), UsageError);
}

TEST_CASE("diversity is the ordered double sum") {
    CHECK(Population::monomorphic(5, 9).diversity() == 0);

    const Population p({BitString::from_string("000"), BitString::from_string("011"),
                        BitString::from_string("101")});
    CHECK(p.diversity() == 12);  // each unordered pair distance counted twice
    CHECK(p.diversity() == p.diversity_from_scratch());
    CHECK(p.diversity() == p.diversity_from_counts());

    const std::size_t n = 23;
    const Population pair({BitString(n), BitString::all_ones(n)});
    CHECK(pair.diversity() == 2 * n);
}

TEST_CASE("replace updates counts and cache incrementally") {
    Population p(std::vector<BitString>(2, BitString::from_string("000")));
    p.replace(0, BitString::from_string("011"));
    CHECK(p.diversity() == 4);

    Population q({BitString::from_string("0101"), BitString::from_string("1100")});
    const auto before = q.diversity();
    q.replace(1, q.member(1));  // replacing by a clone changes nothing
    CHECK(q.diversity() == before);

    const std::size_t n = 17;
    Population clones(std::vector<BitString>(2, BitString(n)));
    clones.replace(1, BitString::all_ones(n));
    CHECK(clones.diversity() == 2 * n);

    CHECK_THROWS_AS(q.replace(2, BitString(4)), UsageError);
    CHECK_THROWS_AS(q.replace(0, BitString(5)), UsageError);
}

TEST_CASE("cache stays exact under random replacement sequences") {
    Rng rng(42);
    for (const std::size_t n : {5ul, 70ul}) {
        Population p = Population::uniform_random(6, n, rng);
        for (int step = 0; step < 200; ++step) {
            const std::size_t d = static_cast<std::size_t>(rng.index(6));
            const std::uint64_t before = p.diversity();
            p.replace(d, BitString::random(n, rng));
            const std::uint64_t after = p.diversity();

            REQUIRE(after == p.diversity_from_scratch());
            REQUIRE(after == p.diversity_from_counts());
            const std::uint64_t change = after > before ? after - before : before - after;
            REQUIRE(change <= max_step_change(6, n));
            REQUIRE(static_cast<double>(after) <= diversity_upper_bound(6, n));
        }
    }
}

TEST_CASE("member point diversities sum to the population diversity") {
    Rng rng(11);
    const Population p = Population::uniform_random(7, 31, rng);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p.point_diversity(p.member(i));
    CHECK(total == p.diversity());
}

TEST_CASE("max diversity population attains the two-block maximum") {
    for (const std::size_t mu : {2ul, 5ul, 8ul}) {
        const std::size_t n = 16;
        const Population p = Population::max_diversity(mu, n);
        CHECK(p.diversity() == 2 * ((mu + 1) / 2) * (mu / 2) * n);
        CHECK(p.diversity() == max_diversity_value(mu, n));
        CHECK(static_cast<double>(p.diversity()) <= diversity_upper_bound(mu, n));
    }
}
