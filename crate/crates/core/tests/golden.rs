//! Hand-assembled packets checked into tests/golden. Each must decode to
//! the value described in its comment line and encode back byte for byte.

use std::path::Path;

use trailerlink::codec::{AckFrame, DataPacket, InterestPacket, Nonce, Packet, SignatureKind};
use trailerlink::pubsub::{AckMessage, PubSubMessage};
use trailerlink::streams::{decapsulate, encapsulate, CanFrame};

fn golden(name: &str) -> Vec<u8> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let hex: String = text.lines().filter(|l| !l.starts_with('#')).collect();
    hex::decode(hex.trim()).unwrap()
}

#[test]
fn can_interest() {
    let bytes = golden("interest-can.hex");
    let want = InterestPacket::new("/trailer/can".parse().unwrap(), Nonce([1, 2, 3, 4])).with_must_be_fresh(true);
    assert_eq!(bytes.len(), 30);
    assert_eq!(InterestPacket::decode(&bytes).unwrap(), (want.clone(), 30));
    assert_eq!(want.encode(), bytes);
}

#[test]
fn hmac_data() {
    let bytes = golden("data-hmac.hex");
    let want = DataPacket {
        name: "/trailer/can".parse().unwrap(),
        content: b"hi".to_vec(),
        signature_kind: SignatureKind::HmacSha256,
        signature_value: vec![0xDE, 0xAD, 0xBE, 0xEF],
    };
    assert_eq!(DataPacket::decode(&bytes).unwrap(), (want.clone(), bytes.len()));
    assert_eq!(want.encode().unwrap(), bytes);
}

#[test]
fn ack_frame() {
    let bytes = golden("ack-frame.hex");
    let want = AckFrame { sequence: 7, stream: 2 };
    assert_eq!(Packet::decode(&bytes).unwrap(), (Packet::Ack(want), 8));
    assert_eq!(want.encode().to_vec(), bytes);
}

#[test]
fn pubsub_ack() {
    let bytes = golden("pubsub-ack.hex");
    let want = AckMessage { topic_id: 2, sequence: 9, timestamp_ns: 1000 };
    let msg = PubSubMessage::decode(&bytes).unwrap();
    assert!(msg.payload.is_empty());
    assert_eq!(AckMessage::from_message(&msg), Some(want));
    assert_eq!(want.encode().to_vec(), bytes);
}

#[test]
fn classic_can_frame() {
    let bytes = golden("can-frame.hex");
    let want = CanFrame { can_id: 0x0102_0304, fd: false, data: (0..8).collect() };
    assert_eq!(decapsulate(&bytes).unwrap(), vec![want.clone()]);
    assert_eq!(encapsulate(&[want]).unwrap(), bytes);
}
