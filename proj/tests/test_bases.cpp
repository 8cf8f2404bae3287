#include <catch_amalgamated.hpp>

#include <exsyn/bases.hpp>
#include <exsyn/gates.hpp>

#include <random>

using namespace exsyn;

namespace
{

/* swap check written against from_rows semantics: evaluate f on explicit bit vectors */
bool swap_preserves( boolean_function const& f, uint32_t i, uint32_t j )
{
  auto const m = f.num_inputs();
  for ( uint64_t r = 0; r < f.num_rows(); ++r )
  {
    std::vector<bool> v( m );
    for ( auto k = 0u; k < m; ++k )
      v[k] = boolean_function::input_bit( r, m, k );
    std::swap( v[i], v[j] );
    auto const s = boolean_function::row_of( v );
    if ( f.row( r ) != f.row( s ) )
      return false;
  }
  return true;
}

} // namespace

TEST_CASE( "builtin bases" )
{
  auto std_b = builtin_basis( "standard" );
  CHECK( std_b.size() == 6 );
  CHECK( std_b.max_arity() == 2 );

  auto rev = builtin_basis( "reversible" );
  REQUIRE( rev.size() == 2 );
  for ( auto const& f : rev.functions )
  {
    CHECK( f.num_inputs() == 3 );
    CHECK( f.num_outputs() == 3 );
  }

  CHECK( builtin_basis( "comparator" ).size() == 1 );
  CHECK( builtin_basis( "nand" ).size() == 1 );
  CHECK( builtin_basis( "nor" ).size() == 1 );

  auto ite = builtin_basis( "ite" );
  CHECK( ite.size() == 3 );
  CHECK( ite.functions[1].num_inputs() == 0 );

  CHECK_THROWS_AS( builtin_basis( "bogus" ), std::invalid_argument );
}

TEST_CASE( "reversible gates are permutations" )
{
  for ( auto const& f : builtin_basis( "reversible" ).functions )
  {
    std::vector<bool> hit( 8, false );
    for ( uint64_t r = 0; r < 8; ++r )
    {
      /* output j is input position j, so pack with output 0 as the most significant bit */
      auto const packed = f.row( r );
      uint64_t as_row = ( ( packed & 1u ) << 2 ) | ( packed & 2u ) | ( ( packed >> 2 ) & 1u );
      CHECK_FALSE( hit[as_row] );
      hit[as_row] = true;
    }
  }
}

TEST_CASE( "nand is universal" )
{
  auto const nand = builtin_basis( "nand" ).functions[0];
  auto n = [&]( bool a, bool b ) { return nand.get( ( uint64_t( a ) << 1 ) | b, 0 ); };
  for ( int a = 0; a < 2; ++a )
  {
    CHECK( n( a, a ) == !a );
    for ( int b = 0; b < 2; ++b )
    {
      CHECK( n( n( a, b ), n( a, b ) ) == ( a && b ) );
      CHECK( n( n( a, a ), n( b, b ) ) == ( a || b ) );
    }
  }
}

TEST_CASE( "comparator outputs min then max" )
{
  auto const c = gates::cmp();
  for ( uint64_t r = 0; r < 4; ++r )
  {
    bool const a = r >> 1, b = r & 1;
    CHECK( c.get( r, 0 ) == std::min( a, b ) );
    CHECK( c.get( r, 1 ) == std::max( a, b ) );
  }
}

TEST_CASE( "selector width" )
{
  CHECK( selector_width( 2u ) == 1 );
  CHECK( selector_width( 6u ) == 3 );
  CHECK( selector_width( 1u ) == 0 );
  CHECK( selector_width( 4u ) == 2 );
  CHECK( selector_width( 5u ) == 3 );
  CHECK( selector_width( builtin_basis( "standard" ) ) == 3 );
}

TEST_CASE( "commuting input pairs" )
{
  using pairs = std::vector<std::pair<uint32_t, uint32_t>>;
  CHECK( commuting_pairs( gates::and_() ) == pairs{{0, 1}} );
  CHECK( commuting_pairs( gates::impl() ).empty() );
  CHECK( commuting_pairs( gates::fredkin() ).empty() );
  CHECK( commuting_pairs( gates::toffoli() ).empty() );
  CHECK( commuting_pairs( gates::cmp() ) == pairs{{0, 1}} );
  CHECK( commuting_pairs( gates::ite() ).empty() );
  CHECK( commuting_pairs( gates::and_( 3 ) ) == pairs{{0, 1}, {0, 2}, {1, 2}} );

  auto cm = commuting_input_pairs( builtin_basis( "standard" ) );
  auto const& b = builtin_basis( "standard" );
  for ( auto i = 0u; i < b.size(); ++i )
  {
    INFO( b.functions[i].name() );
    if ( b.functions[i].num_inputs() < 2 )
      CHECK( cm[i].empty() );
    else if ( b.functions[i].name() == "IMPL" )
      CHECK( cm[i].empty() );
    else
      CHECK( cm[i] == pairs{{0, 1}} );
  }
}

TEST_CASE( "property: commuting pairs agree with an explicit swap" )
{
  std::mt19937_64 rng( 3 );
  for ( int trial = 0; trial < 500; ++trial )
  {
    uint32_t const m = 1 + rng() % 4;
    uint32_t const n = 1 + rng() % 2;
    auto f = boolean_function::from_rows( "f", m, n, [&]( uint64_t ) { return rng() & 3u; } );
    /* bias some functions towards symmetry */
    if ( trial % 3 == 0 )
      f = boolean_function::from_rows( "s", m, n, [&]( uint64_t r ) { return uint64_t( __builtin_popcountll( r ) * 7 ) & 3u; } );
    auto const got = commuting_pairs( f );
    for ( auto i = 0u; i < m; ++i )
      for ( auto j = i + 1; j < m; ++j )
      {
        bool const listed = std::find( got.begin(), got.end(), std::make_pair( i, j ) ) != got.end();
        REQUIRE( listed == swap_preserves( f, i, j ) );
      }
  }
  for ( auto const& name : builtin_basis_names() )
  {
    auto const b = builtin_basis( name );
    auto const cm = commuting_input_pairs( b );
    for ( auto i = 0u; i < b.size(); ++i )
      for ( auto [x, y] : cm[i] )
        CHECK( swap_preserves( b.functions[i], x, y ) );
  }
}

TEST_CASE( "basis files" )
{
  auto b = parse_basis( "# comment\nMAJ 3 1 0xe8\nHA 2 2 0x6 0x8\n" );
  REQUIRE( b.size() == 2 );
  CHECK( b.functions[0].num_inputs() == 3 );
  CHECK( b.functions[1].num_outputs() == 2 );
  CHECK( b.functions[1].get( 3, 1 ) );
  auto again = parse_basis( serialize_basis( b ) );
  REQUIRE( again.size() == 2 );
  for ( auto i = 0u; i < 2u; ++i )
    CHECK( again.functions[i].same_table( b.functions[i] ) );

  CHECK_THROWS_AS( parse_basis( "F 2 1\n" ), std::invalid_argument );
  CHECK_THROWS_AS( parse_basis( "F 2 1 0x1ff\n" ), std::invalid_argument );
  CHECK_THROWS_AS( parse_basis( "# nothing\n" ), std::invalid_argument );

  auto net = load_basis( std::string( EXSYN_DATA_DIR ) + "/bases/netlist.basis" );
  CHECK( net.find( gates::nand_( 4 ) ) >= 0 );
  CHECK( net.find( gates::xor_() ) >= 0 );
  CHECK( basis_by_name_or_path( "nor" ).size() == 1 );
}
