use proptest::prelude::*;
use trailerlink::codec::{DataPacket, InterestPacket, Name, Nonce, Packet, SignatureKind, StreamFramer};
use trailerlink::pairing::{parse_gps_csv, spoof_check, GpsFix, SpoofCheckParams};
use trailerlink::pubsub::{fragment, PubSubMessage};
use trailerlink::scenario::Scenario;
use trailerlink::streams::{decapsulate, encapsulate, CanFrame};

fn name() -> impl Strategy<Value = Name> {
    prop::collection::vec(prop::collection::vec(any::<u8>(), 1..40), 1..6)
        .prop_map(|c| Name::from_components(c).unwrap())
}

fn interest() -> impl Strategy<Value = InterestPacket> {
    (name(), any::<[u8; 4]>(), any::<u64>(), any::<bool>()).prop_map(|(n, nonce, life, fresh)| {
        InterestPacket::new(n, Nonce(nonce)).with_lifetime_ms(life).with_must_be_fresh(fresh)
    })
}

fn data() -> impl Strategy<Value = DataPacket> {
    (name(), prop::collection::vec(any::<u8>(), 0..2000), any::<u8>(), prop::collection::vec(any::<u8>(), 0..80))
        .prop_map(|(name, content, kind, sig)| DataPacket {
            name,
            content,
            signature_kind: SignatureKind::from_code(kind),
            signature_value: sig,
        })
}

fn can_frame() -> impl Strategy<Value = CanFrame> {
    (0u32..1 << 29, any::<bool>(), any::<u64>()).prop_map(|(id, fd, seed)| {
        let len = CanFrame::expected_len(fd);
        CanFrame { can_id: id, fd, data: (0..len).map(|i| (seed >> (i % 8)) as u8 ^ i as u8).collect() }
    })
}

proptest! {
    #[test]
    fn interest_roundtrip(i in interest()) {
        let bytes = i.encode();
        prop_assert_eq!(bytes.len(), i.encoded_len());
        prop_assert_eq!(InterestPacket::decode(&bytes).unwrap(), (i, bytes.len()));
    }

    #[test]
    fn data_roundtrip(d in data()) {
        let bytes = d.encode().unwrap();
        prop_assert_eq!(bytes.len(), d.encoded_len());
        prop_assert_eq!(DataPacket::decode(&bytes).unwrap(), (d, bytes.len()));
    }

    #[test]
    fn name_uri_roundtrip(n in name()) {
        prop_assert_eq!(n.to_string().parse::<Name>().unwrap(), n);
    }

    #[test]
    fn framer_reassembles_any_chunking(ps in prop::collection::vec(interest(), 1..20), cuts in prop::collection::vec(1usize..50, 1..200)) {
        let encoded: Vec<Vec<u8>> = ps.iter().map(InterestPacket::encode).collect();
        let stream: Vec<u8> = encoded.concat();
        let mut framer = StreamFramer::new();
        let mut got = Vec::new();
        let mut pos = 0;
        let mut cut = cuts.iter().cycle();
        while pos < stream.len() {
            let n = (*cut.next().unwrap()).min(stream.len() - pos);
            framer.push(&stream[pos..pos + n]);
            pos += n;
            while let Some(f) = framer.next_frame().unwrap() {
                got.push(f);
            }
        }
        prop_assert_eq!(got, encoded);
    }

    #[test]
    fn decoders_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
        let _ = Packet::decode(&bytes);
        let _ = PubSubMessage::decode(&bytes);
        let _ = decapsulate(&bytes);
        let mut framer = StreamFramer::new();
        framer.push(&bytes);
        while let Ok(Some(_)) = framer.next_frame() {}
    }

    #[test]
    fn text_parsers_never_panic(text in "[ -~\n]{0,200}") {
        let _ = Scenario::parse(&text);
        let _ = parse_gps_csv(&text);
        let _ = text.parse::<Name>();
    }

    #[test]
    fn can_roundtrip(frames in prop::collection::vec(can_frame(), 1..12)) {
        let bytes = encapsulate(&frames).unwrap();
        prop_assert_eq!(decapsulate(&bytes).unwrap(), frames);
    }

    #[test]
    fn fragments_fit_the_mtu(len in 1usize..20_000, mtu in 65usize..3000) {
        let payload = vec![0x5A; len];
        let frags = fragment(1, 1, 0, &payload, mtu).unwrap();
        prop_assert!(frags.iter().all(|f| f.encode().len() <= mtu));
        let total: usize = frags.iter().map(|f| f.payload.len()).sum();
        prop_assert_eq!(total, len);
    }

    #[test]
    fn spoof_check_symmetric_and_monotone(
        d in 0.0f64..10.0, e_t in 0.0f64..3.0, e_r in 0.0f64..3.0, extra in 0.0f64..3.0,
        x in -500.0f64..500.0, y in -500.0f64..500.0, nx in -8.0f64..8.0, ny in -8.0f64..8.0,
    ) {
        let a = [GpsFix::new(0, x, y)];
        let b = [GpsFix::new(0, x - d + nx, y - d + ny)];
        let v = spoof_check(&a, &b, &SpoofCheckParams::new(d, e_t, e_r).unwrap()).unwrap();
        let swapped = spoof_check(&a, &b, &SpoofCheckParams::new(d, e_r, e_t).unwrap()).unwrap();
        prop_assert_eq!(&v, &swapped);
        let wider = spoof_check(&a, &b, &SpoofCheckParams::new(d, e_t + extra, e_r).unwrap()).unwrap();
        if v[0] == trailerlink::pairing::Verdict::Consistent {
            prop_assert_eq!(wider[0], trailerlink::pairing::Verdict::Consistent);
        }
    }
}
