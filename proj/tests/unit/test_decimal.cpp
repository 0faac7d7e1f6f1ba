#include "lprisk/decimal.hpp"

#include <doctest.h>

#include <random>

using lprisk::Decimal;

namespace {

Decimal dec(const char* text) {
    auto d = Decimal::parse(text);
    REQUIRE(d.has_value());
    return *d;
}

}  // namespace

TEST_CASE("decimal parse and print round-trip") {
    CHECK(dec("0").str() == "0");
    CHECK(dec("100").str() == "100");
    CHECK(dec("1.5").str() == "1.5");
    CHECK(dec("-3.25").str() == "-3.25");
    CHECK(dec("0.001").str() == "0.001");
    CHECK(dec("1.50").str() == "1.5");     // trailing zeros normalized
    CHECK(dec("-0").str() == "0");
    CHECK(dec("1e3").str() == "1000");
    CHECK(dec("2.5e-3").str() == "0.0025");
    CHECK(dec("12.34E2").str() == "1234");
}

TEST_CASE("decimal parse rejects junk") {
    CHECK(!Decimal::parse(""));
    CHECK(!Decimal::parse("abc"));
    CHECK(!Decimal::parse("1.").has_value());
    CHECK(!Decimal::parse(".5").has_value());
    CHECK(!Decimal::parse("1..2").has_value());
    CHECK(!Decimal::parse("1e").has_value());
    CHECK(!Decimal::parse("1 0").has_value());
    CHECK(!Decimal::parse("0x10").has_value());
    CHECK(!Decimal::parse("nan").has_value());
}

TEST_CASE("decimal arithmetic is exact") {
    CHECK(dec("0.1") + dec("0.2") == dec("0.3"));  // the classic float trap
    CHECK(dec("1.005") - dec("0.005") == dec("1"));
    CHECK(dec("1.5") * dec("2") == dec("3"));
    CHECK(dec("0.001") * dec("0.002") == dec("0.000002"));
    CHECK((dec("5") - dec("7")).str() == "-2");
    CHECK(-dec("1.25") == dec("-1.25"));
}

TEST_CASE("decimal comparison across scales") {
    CHECK(dec("1.5") == dec("1.50"));
    CHECK(dec("1.5") < dec("1.51"));
    CHECK(dec("-2") < dec("0.0001"));
    CHECK(dec("10") > dec("9.999999"));
    CHECK(dec("0") == Decimal());
}

TEST_CASE("decimal significant digits") {
    CHECK(dec("0").significant_digits() == 1);
    CHECK(dec("123.45").significant_digits() == 5);
    CHECK(dec("0.00001").significant_digits() == 1);
    const auto big = Decimal::parse("12345678901234567890123456789012345678");  // 38 digits
    REQUIRE(big.has_value());
    CHECK(big->significant_digits() == 38);
    const auto bigger = Decimal::parse("123456789012345678901234567890123456789");
    REQUIRE(bigger.has_value());
    CHECK(bigger->significant_digits() == 39);
}

TEST_CASE("decimal to_double") {
    CHECK(dec("2.5").to_double() == doctest::Approx(2.5));
    CHECK(dec("-0.125").to_double() == doctest::Approx(-0.125));
    CHECK(dec("1000000").to_double() == doctest::Approx(1e6));
}

TEST_CASE("decimal addition properties over random values") {
    std::mt19937_64 gen(99);
    auto random_decimal = [&]() {
        const long long mant =
            static_cast<long long>(gen() % 1000000000ULL) - 500000000LL;
        const int scale = static_cast<int>(gen() % 7);
        return Decimal::from_parts(mant, scale);
    };
    for (int i = 0; i < 500; ++i) {
        const Decimal a = random_decimal();
        const Decimal b = random_decimal();
        const Decimal c = random_decimal();
        CHECK(a + b == b + a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a + b - b == a);
        CHECK(a * b == b * a);
        // round-trip through text
        const auto back = Decimal::parse((a * b).str());
        REQUIRE(back.has_value());
        CHECK(*back == a * b);
    }
}
