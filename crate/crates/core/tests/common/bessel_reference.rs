//! Reference values of J_n and Y_n from a 40-digit evaluation, rounded to f64.

/// `(order, x, J_n(x), Y_n(x))`.
pub const REFERENCE: [(usize, f64, f64, f64); 88] = [
    (0, 0.1, 0.99750156206604, -1.5342386513503667),
    (0, 0.5, 0.9384698072408129, -0.44451873350670656),
    (0, 1.0, 0.7651976865579666, 0.08825696421567696),
    (0, 2.5, -0.048383776468198, 0.4980703596152319),
    (0, 5.0, -0.1775967713143383, -0.30851762524903376),
    (0, 10.0, -0.24593576445134835, 0.055671167283599395),
    (0, 25.0, 0.09626678327595811, -0.12724943226800614),
    (0, 50.0, 0.055812327669251816, -0.09806499547007708),
    (0, 100.0, 0.019985850304223122, -0.07724431336508315),
    (0, 150.0, -0.0007740903753942912, -0.06514222150903735),
    (0, 200.0, -0.015437439930565091, -0.05426577524981791),
    (1, 0.1, 0.049937526036242, -6.4589510947020266),
    (1, 0.5, 0.2422684576748739, -1.471472392670243),
    (1, 1.0, 0.4400505857449335, -0.7812128213002887),
    (1, 2.5, 0.49709410246427405, 0.1459181379667858),
    (1, 5.0, -0.32757913759146523, 0.14786314339122683),
    (1, 10.0, 0.04347274616886144, 0.24901542420695388),
    (1, 25.0, -0.1253502495802899, -0.09882996478323741),
    (1, 50.0, -0.09751182812517514, -0.05679566856201477),
    (1, 100.0, -0.07714535201411216, -0.020372312002759792),
    (1, 150.0, -0.06514516365772736, 0.00055695634956084),
    (1, 200.0, -0.05430453818237822, 0.01530182458038999),
    (2, 0.1, 0.001248958658799919, -127.64478324269015),
    (2, 0.5, 0.03060402345868264, -5.441370837174266),
    (2, 1.0, 0.11490348493190047, -1.6506826068162543),
    (2, 2.5, 0.44605905843961724, -0.38133584924180325),
    (2, 5.0, 0.046565116277752214, 0.36766288260552454),
    (2, 10.0, 0.2546303136851206, -0.0058680824422086145),
    (2, 25.0, -0.1062948032423813, 0.11934303508534715),
    (2, 50.0, -0.05971280079425882, 0.0957931687275965),
    (2, 100.0, -0.021528757344505364, 0.07683686712502795),
    (2, 150.0, -9.451180670874022e-05, 0.06514964759369817),
    (2, 200.0, 0.01489439454874131, 0.05441879349562181),
    (5, 0.1, 2.6030817909644417e-09, -24461484.50230391),
    (5, 0.5, 8.053627241357474e-06, -7946.301478807473),
    (5, 1.0, 0.00024975773021123444, -260.4058666258122),
    (5, 2.5, 0.01950162513450322, -3.8301760007407517),
    (5, 5.0, 0.26114054612017007, -0.4536948224911019),
    (5, 10.0, -0.23406152818679363, 0.13540304768936232),
    (5, 25.0, -0.06600799539842299, -0.14705799311372267),
    (5, 50.0, -0.08140024769656964, -0.07854841391308165),
    (5, 100.0, -0.07419573696451393, -0.029480196281661895),
    (5, 150.0, -0.06499863174072584, -0.004652497340417635),
    (5, 200.0, -0.055132678944014676, 0.012019640832200107),
    (10, 0.1, 2.690532895434217e-20, -1.1831335132045192e+18),
    (10, 0.5, 2.6131773608228033e-13, -121963623349.56963),
    (10, 1.0, 2.6306151236874534e-10, -121618014.27868919),
    (10, 2.5, 2.2247284173983834e-06, -14782.847716021068),
    (10, 5.0, 0.0014678026473104741, -25.1291100956101),
    (10, 10.0, 0.20748610663335887, -0.35981415218340274),
    (10, 25.0, -0.07517984394852328, -0.1487183904998065),
    (10, 50.0, -0.11384784914946938, 0.005723897182053513),
    (10, 100.0, -0.05473217693547201, 0.058331574236414926),
    (10, 150.0, -0.020612788945218587, 0.06187635520812076),
    (10, 200.0, 0.0015301688136801642, 0.05643344451799607),
    (20, 0.1, 3.919437720858622e-45, -4.060708420126368e+42),
    (20, 0.5, 3.7272019617047145e-31, -4.271430121565906e+28),
    (20, 1.0, 3.8735030085246576e-25, -4.113970314835505e+22),
    (20, 2.5, 3.309079383658777e-17, -484776559582090.1),
    (20, 5.0, 2.7703300521289416e-11, -593396529.6914321),
    (20, 10.0, 1.1513369247813398e-05, -1597.483848269626),
    (20, 25.0, 0.05199404922830323, 0.19804074776289243),
    (20, 50.0, -0.11670435275957974, 0.01644263394811578),
    (20, 100.0, 0.062217458498338755, 0.051247973076188426),
    (20, 150.0, 0.06344724095386198, -0.016024629052560344),
    (20, 200.0, 0.03745093871086004, -0.042385742893228676),
    (35, 0.1, 2.8163546598136317e-86, -3.229211667724956e+83),
    (35, 0.5, 8.183020779592047e-62, -1.1115084929709374e+59),
    (35, 1.0, 2.797056804555227e-51, -3.252806859985873e+48),
    (35, 2.5, 2.2843210796424045e-37, -3.991504156684597e+34),
    (35, 5.0, 6.887971304412151e-27, -1.3340498157175255e+24),
    (35, 10.0, 1.3970838454349007e-16, -67931388903423.8),
    (35, 25.0, 0.0002293656602088367, -56.77584171175308),
    (35, 50.0, 0.09387640864737454, 0.09485108066277001),
    (35, 100.0, 0.08138982351520893, 0.013098065771246673),
    (35, 150.0, -0.03850465146981868, -0.05368394395792197),
    (35, 200.0, -0.05344309565993264, 0.019411646590614076),
    (50, 0.1, 2.9201425690996437e-130, -2.180102618471604e+127),
    (50, 0.5, 2.590558066078543e-95, -2.4575848224461087e+92),
    (50, 1.0, 2.9060049481732392e-80, -2.191142812605339e+77),
    (50, 2.5, 2.2341702499526218e-60, -2.8530384545826846e+57),
    (50, 5.0, 2.2942476159525402e-45, -2.788837017583895e+42),
    (50, 10.0, 1.7845136078715953e-30, -3.6410665018007404e+27),
    (50, 25.0, 9.75615942802298e-12, -753573251.4466262),
    (50, 50.0, 0.12140902189761506, -0.21031655464397742),
    (50, 100.0, -0.038698339728525384, 0.07650526394480305),
    (50, 150.0, -0.057300163341716066, -0.034903029093935285),
    (50, 200.0, 0.015693898978573085, 0.05514686137423668),
];
